// The acceptance flow: create session -> upload fixture dataset -> draw a
// square ROI -> run epm_closed_arm -> the displayed event count equals the
// count in the server's events payload, and every displayed number can be
// recomputed from the intercepted responses alone.

import assert from "node:assert/strict";
import { test } from "node:test";

import { EthoApi, EventsPayload } from "../src/api.js";
import { SessionController } from "../src/controller.js";
import { addVertex, setName } from "../src/roi.js";
import { ReplayFetch, loadFixture } from "./fakefetch.js";

const UTTERANCE =
  "Define <|closed time|>:\n```\n" + 'define closed_t as object("closed arm", overlap)\n```';

function makeController(): { controller: SessionController; recorder: ReplayFetch } {
  const flow = loadFixture("flow.json");
  const recorder = new ReplayFetch(flow.tape);
  // the ONLY fetch the UI ever gets is the recording one
  const controller = new SessionController(new EthoApi(recorder.fetch));
  return { controller, recorder };
}

function drawSquare(controller: SessionController, name: string): void {
  let draft = controller.state.roiDraft;
  for (const [x, y] of [
    [0, 0],
    [50, 0],
    [50, 50],
    [0, 50],
  ] as Array<[number, number]>) {
    draft = addVertex(draft, x, y);
  }
  controller.state.roiDraft = setName(draft, name);
}

function countBouts(payload: EventsPayload): number {
  let total = 0;
  for (const key of Object.keys(payload.events)) {
    total += payload.events[key].length;
  }
  return total;
}

test("ui flow: session, dataset, ROI, run, count from server payload", async () => {
  const { controller, recorder } = makeController();
  const upload = loadFixture("dataset_upload.json");

  await controller.createSession();
  assert.ok(controller.state.sessionId);

  await controller.uploadDataset(upload.dataset, upload.objects);
  assert.equal(controller.state.dataset?.n_frames, 100);
  assert.deepEqual(controller.state.objects, ["closed arm", "open arm"]);

  drawSquare(controller, "ROI9");
  assert.equal(await controller.submitRoi(), true);
  assert.deepEqual(controller.state.objects, ["ROI9", "closed arm", "open arm"]);
  assert.equal(controller.state.roiDraft.vertices.length, 0); // draft cleared

  // mutation -> refresh: the displayed list equals a fresh GET
  const fresh = await new EthoApi(recorder.fetch).getObjects(controller.state.sessionId!);
  assert.deepEqual(controller.state.objects, fresh.objects);

  await controller.runBehavior("epm_closed_arm");
  const summary = controller.state.results[0];
  assert.equal(summary.behavior, "epm_closed_arm");

  // the displayed count must equal the count in the server's events payload,
  // recomputed here from the intercepted response body, not from app state
  const runExchange = recorder.log.find(
    (e) => e.method === "POST" && e.path.endsWith("/run") && e.response.status === 200,
  );
  assert.ok(runExchange);
  const intercepted = runExchange!.response.json as EventsPayload;
  assert.equal(summary.totalBouts, countBouts(intercepted));
  assert.equal(summary.nFrames, intercepted.n_frames);
  for (const entry of summary.perKey) {
    assert.equal(entry.bouts, intercepted.events[entry.key].length);
  }
  assert.deepEqual(intercepted.events["m0"], [[40, 70]]); // the real engine said so
});

test("rejected polygons surface the server diagnostic and stay editable", async () => {
  const { controller } = makeController();
  const upload = loadFixture("dataset_upload.json");
  await controller.createSession();
  await controller.uploadDataset(upload.dataset, upload.objects);

  drawSquare(controller, "ROI9");
  assert.equal(await controller.submitRoi(), true);
  const objectsAfterFirst = [...controller.state.objects];

  // duplicate name: server rejects, draft survives for editing
  drawSquare(controller, "ROI9");
  assert.equal(await controller.submitRoi(), false);
  assert.match(controller.state.errors[0].message, /duplicate/);
  assert.equal(controller.state.roiDraft.vertices.length, 4);
  assert.deepEqual(controller.state.objects, objectsAfterFirst); // nothing persisted

  // self-intersecting polygon: same contract
  let draft = controller.state.roiDraft;
  controller.state.roiDraft = { name: "bow", vertices: [[0, 0], [40, 40], [40, 0], [0, 40]] };
  assert.equal(await controller.submitRoi(), false);
  assert.match(controller.state.errors.at(-1)!.message, /self-intersecting/);
  assert.deepEqual(controller.state.objects, objectsAfterFirst);
});

test("utterance panel: symbols, compiled behaviors, then a run", async () => {
  const { controller, recorder } = makeController();
  const upload = loadFixture("dataset_upload.json");
  await controller.createSession();
  await controller.uploadDataset(upload.dataset, upload.objects);

  await controller.submitUtterance(UTTERANCE);
  assert.deepEqual(controller.state.symbols, ["closed time"]);
  assert.deepEqual(controller.state.behaviors, ["closed_t"]);
  assert.equal(controller.state.errors.length, 0);

  await controller.runBehavior("closed_t");
  const summary = controller.state.results.at(-1)!;
  const exchange = recorder.log.at(-1)!;
  assert.equal(exchange.path.endsWith("/run"), true);
  assert.equal(summary.totalBouts, countBouts(exchange.response.json as EventsPayload));
});

test("viewers render server SVG bytes untouched", async () => {
  const { controller, recorder } = makeController();
  const upload = loadFixture("dataset_upload.json");
  await controller.createSession();
  await controller.uploadDataset(upload.dataset, upload.objects);
  await controller.runBehavior("epm_closed_arm");

  await controller.loadEthogram(["epm_closed_arm"]);
  const svgExchange = recorder.log.find((e) => e.path.includes("/ethogram.svg"));
  assert.ok(controller.state.ethogramSvg!.startsWith("<svg"));
  assert.equal(controller.state.ethogramSvg, svgExchange!.response.text);

  await controller.loadTrajectory("m0", ["mouse_center"], "epm_closed_arm");
  assert.ok(controller.state.trajectorySvg!.startsWith("<svg"));
});

test("no analytics client-side: all numbers trace back to the fetch log", async () => {
  const { controller, recorder } = makeController();
  const upload = loadFixture("dataset_upload.json");
  await controller.createSession();
  await controller.uploadDataset(upload.dataset, upload.objects);
  await controller.runBehavior("epm_closed_arm");

  const payloads = recorder.log
    .filter((e) => e.response.json !== undefined)
    .map((e) => e.response.json as Record<string, unknown>)
    .filter((p) => typeof p["events"] === "object" && p["events"] !== null);

  for (const result of controller.state.results) {
    const source = payloads.find(
      (p) =>
        p["n_frames"] === result.nFrames &&
        countBouts(p as unknown as EventsPayload) === result.totalBouts,
    );
    assert.ok(source, "every displayed result must match an intercepted payload");
  }
  const known = new Set(payloads.flatMap((p) => Object.keys((p["events"] as object) ?? {})));
  for (const result of controller.state.results) {
    for (const entry of result.perKey) {
      assert.ok(known.has(entry.key), `key ${entry.key} came from a payload`);
    }
  }
});
