"""Page-graph construction, guideline retrieval, and a guideline-driven GUI agent.

Episodes of (screenshot, action) steps compile into a directed multigraph of
unique pages. Guidelines retrieved from that graph by embedding similarity and
bounded BFS feed a four-role agent loop. Every model call sits behind a
pluggable oracle with scripted and record/replay backends, so the whole
pipeline verifies offline.
"""

__version__ = "0.1.0"

from pagegraph.model import (
    Action,
    AgentTranscript,
    ClickElement,
    Episode,
    EpisodeStep,
    Guideline,
    OpenApp,
    PageEdge,
    PageGraph,
    PageNode,
    PressKey,
    Rect,
    ScreenRef,
    SelectOption,
    StatusComplete,
    StatusImpossible,
    Swipe,
    Tap,
    TranscriptStep,
    TypeInElement,
    TypeText,
    action_tuples,
    describe_action,
)

__all__ = [
    "Action",
    "AgentTranscript",
    "ClickElement",
    "Episode",
    "EpisodeStep",
    "Guideline",
    "OpenApp",
    "PageEdge",
    "PageGraph",
    "PageNode",
    "PressKey",
    "Rect",
    "ScreenRef",
    "SelectOption",
    "StatusComplete",
    "StatusImpossible",
    "Swipe",
    "Tap",
    "TranscriptStep",
    "TypeInElement",
    "TypeText",
    "__version__",
    "action_tuples",
    "describe_action",
]
