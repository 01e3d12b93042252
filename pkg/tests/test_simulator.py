from datetime import datetime, timezone

import pytest

from housekeep.domain import TaskPlan, TaskStep, replay
from housekeep.simulator import (
    GoldEntry,
    SCENARIO_IDS,
    SKIP_OBJECT_NOT_PRESENT,
    Scenario,
    SkippedObject,
    UnknownScenario,
    execute,
    load_all_scenarios,
    load_scenario,
    observe,
)

AT = datetime(2025, 3, 1, 9, 0, 0, tzinfo=timezone.utc)


# --- fixtures on disk -------------------------------------------------------------


def test_scenario_roster(scenarios):
    assert set(scenarios) == set(SCENARIO_IDS) == {"dining_table", "living_room", "desk"}
    sizes = {sid: len(s.objects) for sid, s in scenarios.items()}
    assert sizes == {"dining_table": 10, "living_room": 9, "desk": 15}


def test_each_scenario_has_a_stationary_object_and_full_gold_cover(scenarios):
    for scenario in scenarios.values():
        assert set(scenario.gold) == set(scenario.objects)
        assert any(g.stationary for g in scenario.gold.values())
        assert scenario.command.strip()
        assert scenario.cleanup_zone == scenario.id


def test_observations_preserve_fixture_order(scenarios):
    dining = scenarios["dining_table"]
    obs = observe(dining)
    assert tuple(o.name for o in obs) == dining.objects
    assert [o.observation_index for o in obs] == list(range(len(dining.objects)))


def test_initial_state_places_everything_in_the_cleanup_zone(scenarios):
    living = scenarios["living_room"]
    state = living.initial_state()
    assert set(state.placements) == set(living.objects)
    assert set(state.placements.values()) == {"living_room"}
    assert state.event_log == ()


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        load_scenario("garage")


def test_load_all_scenarios_matches_individual_loads(scenarios):
    assert load_all_scenarios()["desk"].objects == scenarios["desk"].objects


# --- gold map validation --------------------------------------------------------------


def test_gold_entry_validation():
    GoldEntry(destination="sink", lenient=("storage_box",), stationary=False, rationale="")
    GoldEntry(destination=None, lenient=(), stationary=True, rationale="fixed")
    with pytest.raises(ValueError):
        GoldEntry(destination="sink", lenient=(), stationary=True, rationale="")
    with pytest.raises(ValueError):
        GoldEntry(destination="stationary", lenient=(), stationary=False, rationale="")
    with pytest.raises(ValueError):
        GoldEntry(destination="sink", lenient=("attic",), stationary=False, rationale="")


def test_scenario_rejects_gold_object_mismatch():
    with pytest.raises(ValueError, match="gold map"):
        Scenario(
            id="t",
            cleanup_zone="t",
            command="tidy",
            objects=("Plate",),
            gold={"Fork": GoldEntry("sink", (), False, "")},
        )


# --- execution -------------------------------------------------------------------------


def test_execute_moves_objects_and_logs_events(scenarios):
    dining = scenarios["dining_table"]
    plan = TaskPlan((TaskStep(("Plate", "Fork"), "sink"), TaskStep(("Salt shaker",), "food_shelf")))
    outcome = execute(plan, dining.initial_state(), at=AT)
    assert outcome.state.placements["Plate"] == "sink"
    assert outcome.state.placements["Salt shaker"] == "food_shelf"
    assert outcome.state.placements["Chair"] == "dining_table"
    assert [e.object for e in outcome.state.event_log] == ["Plate", "Fork", "Salt shaker"]
    assert outcome.skipped == ()
    # the event log alone reproduces the final placements
    replayed = replay(dining.initial_state(), list(outcome.state.event_log))
    assert replayed.placements == outcome.state.placements


def test_execute_hands_objects_to_the_user(scenarios):
    living = scenarios["living_room"]
    plan = TaskPlan((TaskStep(("A brush",), "user_handover"),))
    outcome = execute(plan, living.initial_state(), at=AT)
    assert outcome.state.placements["A brush"] == "with_user"
    assert outcome.executed[0].destination == "user_handover"


def test_execute_skips_objects_not_in_the_world(scenarios):
    dining = scenarios["dining_table"]
    plan = TaskPlan((TaskStep(("Plate", "Gravy boat"), "sink"),))
    outcome = execute(plan, dining.initial_state(), at=AT)
    assert [m.object for m in outcome.executed] == ["Plate"]
    assert outcome.skipped == (SkippedObject("Gravy boat", "sink", SKIP_OBJECT_NOT_PRESENT),)
    assert "Gravy boat" not in outcome.state.placements


def test_spoken_override_changes_narrated_destination_only(scenarios):
    living = scenarios["living_room"]
    plan = TaskPlan((TaskStep(("Jacket",), "trash_can"),))
    outcome = execute(plan, living.initial_state(), at=AT, spoken_override={"Jacket": "storage_box"})
    move = outcome.executed[0]
    assert move.destination == "trash_can"
    assert move.spoken_destination == "storage_box"
    assert outcome.state.placements["Jacket"] == "trash_can"
    assert outcome.state.event_log[0].destination == "trash_can"


def test_execute_is_deterministic(scenarios):
    desk = scenarios["desk"]
    plan = TaskPlan((TaskStep(("Plate", "Cup"), "sink"), TaskStep(("Lemon",), "fridge")))
    first = execute(plan, desk.initial_state(), at=AT)
    second = execute(plan, desk.initial_state(), at=AT)
    assert first.to_dict() == second.to_dict()
    assert first.state.placements == second.state.placements
