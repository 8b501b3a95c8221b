// Browser wiring: binds the controller to the DOM. This is the only module
// that touches document/canvas; everything it displays comes from the
// controller's state, which in turn mirrors server payloads.

import { EthoApi } from "./api.js";
import { SessionController } from "./controller.js";
import { addVertex, canClose, setName, undoVertex } from "./roi.js";
import { hoverInfo } from "./viewers.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const api = new EthoApi((url, init) => fetch(url, init));
  const controller = new SessionController(api);

  const canvas = el<HTMLCanvasElement>("roi-canvas");
  const ctx = canvas.getContext("2d")!;
  const roiName = el<HTMLInputElement>("roi-name");
  const objectList = el<HTMLUListElement>("object-list");
  const symbolList = el<HTMLUListElement>("symbol-list");
  const behaviorList = el<HTMLDivElement>("behavior-list");
  const resultsBox = el<HTMLDivElement>("results");
  const errorsBox = el<HTMLDivElement>("errors");
  const contextBox = el<HTMLDivElement>("context");
  const ethogramBox = el<HTMLDivElement>("ethogram");
  const trajectoryBox = el<HTMLDivElement>("trajectory");
  const hoverBox = el<HTMLDivElement>("hover-info");
  const utterance = el<HTMLTextAreaElement>("utterance");
  const datasetInput = el<HTMLInputElement>("dataset-file");

  function drawCanvas(): void {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = "#1b6ca8";
    ctx.fillStyle = "#1b6ca8";
    const vertices = controller.state.roiDraft.vertices;
    vertices.forEach(([x, y], i) => {
      ctx.beginPath();
      ctx.arc(x, y, 3, 0, 2 * Math.PI);
      ctx.fill();
      if (i > 0) {
        ctx.beginPath();
        ctx.moveTo(vertices[i - 1][0], vertices[i - 1][1]);
        ctx.lineTo(x, y);
        ctx.stroke();
      }
    });
  }

  function render(): void {
    const s = controller.state;
    el<HTMLSpanElement>("session-id").textContent = s.sessionId ?? "none";
    el<HTMLSpanElement>("dataset-summary").textContent = s.dataset
      ? `${s.dataset.id}: ${s.dataset.animal_ids.length} animals, ${s.dataset.n_frames} frames`
      : "no dataset";

    objectList.replaceChildren(
      ...s.objects.map((name) => {
        const li = document.createElement("li");
        li.textContent = name;
        return li;
      }),
    );
    symbolList.replaceChildren(
      ...s.symbols.map((name) => {
        const li = document.createElement("li");
        li.textContent = name;
        return li;
      }),
    );
    behaviorList.replaceChildren(
      ...s.behaviors.map((name) => {
        const button = document.createElement("button");
        button.textContent = `run ${name}`;
        button.addEventListener("click", () => void controller.runBehavior(name));
        return button;
      }),
    );
    resultsBox.replaceChildren(
      ...s.results.map((r) => {
        const div = document.createElement("div");
        div.className = "result";
        const keys = r.perKey.map((k) => `${k.key}: ${k.bouts}`).join(", ");
        div.textContent = `${r.behavior} -> ${r.totalBouts} bouts over ${r.nFrames} frames (${keys})`;
        return div;
      }),
    );
    errorsBox.replaceChildren(
      ...s.errors.map((e) => {
        const div = document.createElement("div");
        div.className = "error";
        const where = e.line != null ? ` at ${e.line}:${e.col}` : "";
        div.textContent = `[${e.source}] ${e.message}${where}`;
        return div;
      }),
    );
    contextBox.replaceChildren(
      ...[...s.resolvedContext, ...s.warnings].map((line) => {
        const div = document.createElement("div");
        div.textContent = line;
        return div;
      }),
    );
    ethogramBox.innerHTML = s.ethogramSvg ?? "<p>no ethogram yet</p>";
    trajectoryBox.innerHTML = s.trajectorySvg ?? "<p>no trajectory yet</p>";
    drawCanvas();
  }

  controller.onChange = render;

  el<HTMLButtonElement>("new-session").addEventListener("click", () => {
    void controller.createSession();
  });

  datasetInput.addEventListener("change", async () => {
    const file = datasetInput.files?.[0];
    if (!file) return;
    const doc = JSON.parse(await file.text());
    await controller.uploadDataset(doc.dataset ?? doc, doc.objects);
  });

  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    controller.state.roiDraft = addVertex(
      controller.state.roiDraft,
      Math.round(event.clientX - rect.left),
      Math.round(event.clientY - rect.top),
    );
    render();
  });

  roiName.addEventListener("input", () => {
    controller.state.roiDraft = setName(controller.state.roiDraft, roiName.value);
  });

  el<HTMLButtonElement>("roi-undo").addEventListener("click", () => {
    controller.state.roiDraft = undoVertex(controller.state.roiDraft);
    render();
  });

  el<HTMLButtonElement>("roi-close").addEventListener("click", () => {
    if (!canClose(controller.state.roiDraft)) {
      return;
    }
    void controller.submitRoi().then((ok) => {
      if (ok) roiName.value = "";
    });
  });

  el<HTMLButtonElement>("send-utterance").addEventListener("click", () => {
    void controller.submitUtterance(utterance.value);
  });

  el<HTMLButtonElement>("load-ethogram").addEventListener("click", () => {
    const names = controller.state.results.map((r) => r.behavior);
    if (names.length) {
      void controller.loadEthogram([...new Set(names)]);
    }
  });

  el<HTMLButtonElement>("load-trajectory").addEventListener("click", () => {
    const animal = el<HTMLInputElement>("traj-animal").value || controller.state.dataset?.animal_ids[0];
    const behavior = controller.state.results.at(-1)?.behavior;
    if (animal) {
      void controller.loadTrajectory(animal, ["all"], behavior);
    }
  });

  ethogramBox.addEventListener("mousemove", (event) => {
    const last = controller.state.results.at(-1);
    const svg = ethogramBox.querySelector("svg");
    if (!last || !svg) return;
    const rect = svg.getBoundingClientRect();
    const fraction = (event.clientX - rect.left) / rect.width;
    const firstKey = last.perKey[0]?.key ?? null;
    if (firstKey === null) return;
    const info = hoverInfo(last.payload, firstKey, fraction);
    hoverBox.textContent =
      info.eventIndex === null
        ? `frame ${info.frame}`
        : `frame ${info.frame}, ${info.key} bout #${info.eventIndex + 1}`;
  });

  render();
}

if (typeof document !== "undefined") {
  main();
}
