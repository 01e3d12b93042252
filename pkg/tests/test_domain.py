from datetime import datetime, timezone

import pytest

from housekeep.domain import (
    DESTINATIONS,
    InconsistentEvent,
    MoveEvent,
    PLACEMENT_DESTINATIONS,
    RouteCategory,
    RouteDecision,
    TaskPlan,
    TaskStep,
    UnknownDestination,
    UserRequest,
    WorldState,
    destination_phrase,
    make_observations,
    parse_destination,
    replay,
)

TS = datetime(2025, 1, 1, 10, 0, 0, tzinfo=timezone.utc)


def test_destination_registry_shape():
    assert set(PLACEMENT_DESTINATIONS) <= set(DESTINATIONS)
    assert set(DESTINATIONS) - set(PLACEMENT_DESTINATIONS) == {"user_handover", "stationary"}
    assert all(d.description for d in DESTINATIONS.values())


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("sink", "sink"),
        ("Trash Can", "trash_can"),
        ("trash_can", "trash_can"),
        ("GARBAGE", "trash_can"),
        ("refrigerator", "fridge"),
        ("Food Shelf", "food_shelf"),
        ("storage box.", "storage_box"),
        ("User Handover", "user_handover"),
        ("none", "stationary"),
        ("Leave in place", "stationary"),
    ],
)
def test_parse_destination_synonyms(raw, expected):
    assert parse_destination(raw) == expected


def test_parse_destination_unknown():
    with pytest.raises(UnknownDestination) as exc:
        parse_destination("the moon")
    assert exc.value.text == "the moon"


def test_destination_phrase():
    assert destination_phrase("trash_can") == "the trash can"
    assert destination_phrase("user_handover") == "you"


def test_make_observations_strips_and_indexes():
    obs = make_observations([" Plate ", "Fork"])
    assert [(o.name, o.observation_index) for o in obs] == [("Plate", 0), ("Fork", 1)]


def test_make_observations_rejects_casefold_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        make_observations(["Plate", "plate"])


def test_observation_rejects_blank_name():
    with pytest.raises(ValueError):
        make_observations(["  "])


def test_user_request_rejects_blank_text():
    with pytest.raises(ValueError):
        UserRequest(text="   ", session_id="s", received_at=TS)


def test_route_decision_prompt_invariant():
    RouteDecision(RouteCategory.UNCLEAR, "what do you mean?")
    RouteDecision(RouteCategory.ACTION_COMMAND)
    with pytest.raises(ValueError):
        RouteDecision(RouteCategory.UNCLEAR)
    with pytest.raises(ValueError):
        RouteDecision(RouteCategory.HISTORY_QUERY, "unexpected prompt")


def test_task_step_validation():
    TaskStep(("Plate",), "sink")
    with pytest.raises(ValueError):
        TaskStep((), "sink")
    with pytest.raises(ValueError):
        TaskStep(("Plate",), "stationary")
    with pytest.raises(ValueError):
        TaskStep(("Plate",), "attic")


def test_task_plan_rejects_duplicate_objects_across_steps():
    with pytest.raises(ValueError, match="more than one step"):
        TaskPlan((TaskStep(("Plate",), "sink"), TaskStep(("plate",), "trash_can")))


def test_task_plan_assignment_and_schema():
    plan = TaskPlan((TaskStep(("Plate", "Fork"), "sink"), TaskStep(("Jacket",), "trash_can")))
    assert plan.assignment() == {"Plate": "sink", "Fork": "sink", "Jacket": "trash_can"}
    assert plan.to_schema() == {
        "tasks": [
            {"objects": ["Plate", "Fork"], "destination": "sink"},
            {"objects": ["Jacket"], "destination": "trash_can"},
        ]
    }


def test_world_state_serialization_sorts_placements():
    state = WorldState(placements={"b": "sink", "a": "fridge"})
    doc = state.to_dict()
    assert list(doc["placements"]) == ["a", "b"]
    assert doc["event_log"] == []


def test_move_event_serialization():
    event = MoveEvent(TS, "Plate", "dining_table", "sink")
    assert event.to_dict() == {
        "timestamp": "2025-01-01T10:00:00Z",
        "object": "Plate",
        "from": "dining_table",
        "to": "sink",
    }


def test_replay_identity_and_fold():
    initial = WorldState(placements={"Plate": "dining_table", "Fork": "dining_table"})
    assert replay(initial, []).placements == initial.placements

    e1 = MoveEvent(TS, "Plate", "dining_table", "sink")
    e2 = MoveEvent(TS, "Plate", "sink", "storage_box")
    e3 = MoveEvent(TS, "Fork", "dining_table", "sink")
    one_shot = replay(initial, [e1, e2, e3])
    stepwise = replay(replay(initial, [e1]), [e2, e3])
    assert one_shot.placements == stepwise.placements == {
        "Plate": "storage_box",
        "Fork": "sink",
    }
    assert len(one_shot.event_log) == 3


def test_replay_rejects_inconsistent_origin():
    initial = WorldState(placements={"Plate": "dining_table"})
    bad = MoveEvent(TS, "Plate", "sink", "storage_box")
    with pytest.raises(InconsistentEvent):
        replay(initial, [bad])
    missing = MoveEvent(TS, "Ghost", "dining_table", "sink")
    with pytest.raises(InconsistentEvent):
        replay(initial, [missing])
