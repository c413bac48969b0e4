"""Episode generators and the reference graph for synthetic worlds."""

from __future__ import annotations

import random

from pagegraph.errors import GenerationError, ValidationError
from pagegraph.model import Episode, EpisodeStep, PageGraph, PageNode, StatusComplete, Tap, TypeText
from pagegraph.world.spec import Page, TaskSpec, Widget, WorldSpec, state_pairs

_MAX_EPISODE_ACTIONS = 200


def generate_episodes(world: WorldSpec, tasks: list[str] | None = None,
                      seed: int = 0) -> list[Episode]:
    """One canonical shortest-route episode per task, ending with StatusComplete.

    Routes come from the world planner, so generation is fully deterministic;
    the seed only feeds episode identifiers.
    """
    names = tasks if tasks is not None else [task.name for task in world.tasks]
    if not names:
        raise GenerationError("no tasks to generate")
    episodes = []
    for number, name in enumerate(names, start=1):
        task = world.task(name)
        episodes.append(_solve_task(world, task, f"{world.scenario}-s{seed}-t{number:02d}"))
    return episodes


def _solve_task(world: WorldSpec, task: TaskSpec, episode_id: str) -> Episode:
    page, state = world.start_page, {}
    steps: list[EpisodeStep] = []
    for _ in range(_MAX_EPISODE_ACTIONS):
        screen = world.screen(page, state)
        action = world.plan_next_action(page, state, task)
        if action is None:
            raise GenerationError(f"task {task.name!r} is unreachable from {page!r}")
        steps.append(EpisodeStep(screen, action))
        if isinstance(action, StatusComplete):
            return Episode(episode_id=episode_id, task=task.name, steps=tuple(steps))
        page, state, _ = world.apply_action(page, state, action)
    raise GenerationError(f"task {task.name!r} did not terminate")


def _prep_actions(page: Page, state: dict, widget: Widget) -> list[Widget] | None:
    """Same-page widgets that satisfy a link's precondition, or None if impossible."""
    prep: list[Widget] = []
    reached = dict(state)
    for key, value in widget.precondition:
        if reached.get(key) == value:
            continue
        provider = None
        for candidate in page.widgets:
            if candidate.kind == "field" and candidate.field_name == key and candidate.text == value:
                provider = candidate
                break
            if candidate.target is None and (key, value) in candidate.effect:
                provider = candidate
                break
        if provider is None:
            return None
        prep.append(provider)
        if provider.kind == "field":
            reached[key] = value
        else:
            reached.update(provider.effect)
    return prep


def trail_cover_episodes(world: WorldSpec) -> list[Episode]:
    """Episodes that traverse every page link exactly once (greedy trails).

    Each trail starts at the first page (in declaration order) that still has
    an unused outgoing link, walks unused links greedily, and becomes one
    episode whose final screen is where the trail ended. Preconditions are
    satisfied by same-page preparation actions; a link whose precondition
    cannot be met on its own page is a generation error.
    """
    unused = {(page.name, widget.widget_id) for page, widget in world.transitions()}
    episodes: list[Episode] = []
    trail_number = 0
    while unused:
        start = next(
            (page for page in world.pages
             if any((page.name, w.widget_id) in unused for w in page.widgets)),
            None,
        )
        if start is None:
            raise GenerationError(f"unreachable links remain: {sorted(unused)}")
        trail_number += 1
        page_name, state = start.name, {}
        steps: list[EpisodeStep] = []
        while True:
            page = world.page(page_name)
            chosen: tuple[Widget, list[Widget]] | None = None
            blocked = False
            for widget in page.widgets:
                if widget.target is None or (page_name, widget.widget_id) not in unused:
                    continue
                prep = _prep_actions(page, state, widget)
                if prep is None:
                    blocked = True
                    continue
                chosen = (widget, prep)
                break
            if chosen is None:
                if blocked and not steps:
                    raise GenerationError(
                        f"link precondition unsatisfiable on page {page_name!r}"
                    )
                break
            widget, prep = chosen
            for helper in prep:
                steps.append(EpisodeStep(world.screen(page_name, state), helper.action()))
                page_name, state, _ = world.apply_action(page_name, state, helper.action())
            steps.append(EpisodeStep(world.screen(page_name, state), widget.action()))
            unused.discard((page_name, widget.widget_id))
            page_name, state, _ = world.apply_action(page_name, state, widget.action())
        if steps:
            episodes.append(Episode(
                episode_id=f"{world.scenario}-trail-{trail_number:03d}",
                task=f"explore the {world.scenario} interface, walk {trail_number}",
                steps=tuple(steps),
                final_screen=world.screen(page_name, state),
            ))
    return episodes


def true_page_graph(world: WorldSpec) -> PageGraph:
    """The reference graph: one node per page, one edge per page link."""
    graph = PageGraph(scenario=world.scenario)
    node_ids: dict[str, str] = {}
    for page in world.pages:
        node = PageNode(
            node_id=graph.new_node_id(),
            summary=page.summary,
            image_locator=world.screen(page.name, {}).locator,
        )
        graph.add_node(node)
        node_ids[page.name] = node.node_id
    for page, widget in world.transitions():
        graph.add_edge(
            node_ids[page.name],
            node_ids[widget.target],
            action_queue=(widget.action_summary(),),
            task=f"reach the {widget.target} page from {page.name}",
        )
    return graph


def random_world(num_pages: int, num_transitions: int, seed: int,
                 scenario: str = "synthetic") -> WorldSpec:
    """A random connected world without preconditions or effects.

    The first ``num_pages - 1`` links form a random spanning arborescence from
    the start page, so every page is reachable; the rest are uniform random
    non-self links. Suitable for trail coverage and scale tests.
    """
    if num_pages < 2:
        raise ValidationError("need at least two pages")
    if num_transitions < num_pages - 1:
        raise ValidationError("too few transitions to connect the world")
    rng = random.Random(seed)
    links: list[tuple[int, int]] = []
    for dst in range(1, num_pages):
        links.append((rng.randrange(dst), dst))
    while len(links) < num_transitions:
        src = rng.randrange(num_pages)
        dst = rng.randrange(num_pages)
        if src != dst:
            links.append((src, dst))
    outgoing: dict[int, list[int]] = {i: [] for i in range(num_pages)}
    for src, dst in links:
        outgoing[src].append(dst)
    pages = []
    for i in range(num_pages):
        name = f"p{i:04d}"
        widgets = tuple(
            Widget(
                widget_id=f"{name}_w{j}",
                label=f"Link {j} to p{dst:04d}",
                kind="button",
                x=(j + 1) / (len(outgoing[i]) + 1),
                y=0.5,
                target=f"p{dst:04d}",
            )
            for j, dst in enumerate(outgoing[i])
        )
        pages.append(Page(
            name=name,
            title=f"Page {i}",
            summary=f"Synthetic page {name} with {len(widgets)} outgoing links.",
            widgets=widgets,
        ))
    return WorldSpec(scenario=scenario, start_page="p0000", pages=tuple(pages))
