"""Environment implementations: live synthetic world and gold-episode replayer."""

from __future__ import annotations

from pagegraph.errors import ValidationError
from pagegraph.model import Action, Episode, ScreenRef, StatusComplete, StatusImpossible
from pagegraph.world.spec import State, WorldSpec


class WorldEnvironment:
    """Mutable per-run state over an immutable world spec."""

    def __init__(self, world: WorldSpec, start_page: str | None = None,
                 state: State | None = None):
        self.world = world
        self.page_name = start_page if start_page is not None else world.start_page
        self.state: State = dict(state) if state else {}
        self.terminal = False

    def current_screen(self) -> ScreenRef:
        if self.terminal:
            raise ValidationError("environment is terminal")
        return self.world.screen(self.page_name, self.state)

    def apply(self, action: Action) -> ScreenRef | None:
        """Apply an action; returns the next screen, or None once terminal."""
        if self.terminal:
            raise ValidationError("environment is terminal")
        if isinstance(action, (StatusComplete, StatusImpossible)):
            self.terminal = True
            return None
        self.page_name, self.state, _ = self.world.apply_action(
            self.page_name, self.state, action
        )
        return self.current_screen()


class EpisodeReplayerEnvironment:
    """Teacher-forcing environment: ignores predictions and walks the gold episode."""

    def __init__(self, episode: Episode):
        self.episode = episode
        self._screens = episode.screens
        self._position = 0

    def current_screen(self) -> ScreenRef:
        if self._position >= len(self._screens):
            raise ValidationError("replayer exhausted")
        return self._screens[self._position]

    def apply(self, action: Action) -> ScreenRef | None:
        if isinstance(action, (StatusComplete, StatusImpossible)):
            return None
        self._position += 1
        if self._position >= len(self._screens):
            return None
        return self._screens[self._position]
