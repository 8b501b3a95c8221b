"""etho: a deterministic behavior-event engine for keypoint tracking data.

Build per-frame relation tables between animals and scene objects, compose
them into interval events with a small algebra, run built-in or
ethoscript-defined behavior programs, and keep analysis sessions in a
dual-memory store. Exposed as a library, the ``etho`` CLI, an HTTP service
and a browser UI.
"""

from .behaviors import (
    BUILTIN_NAMES,
    EvalReport,
    animals_object_events,
    animals_social_events,
    animals_state_events,
    enter_object,
    evaluate_f1,
    run_builtin,
)
from .dsl import BehaviorRegistry, compile_defs, compile_source, parse, scan_symbols, to_source
from .errors import EthoError, EthoSyntaxError
from .events import (
    Event,
    EventDict,
    EventSeq,
    PostProcessSpec,
    add_sequential_events,
    add_simultaneous_events,
    event_stats,
    events_from_mask,
    negate_events,
    postprocess,
)
from .kinematics import (
    animal_center,
    calculate_distance_travelled,
    compute_acceleration,
    compute_speed,
    compute_velocity,
)
from .relations import (
    ComparisonSpec,
    OrientationKind,
    RelationKind,
    animal_animal_relation,
    animal_object_relation,
    parse_comparison,
)
from .session import SessionState, load_state, process_utterance, save_state, token_count
from .trackdata import (
    Dataset,
    ObjectSet,
    SceneObject,
    add_roi,
    get_object_names,
    load_dataset,
    load_objects,
    save_dataset,
)

__version__ = "0.1.0"
