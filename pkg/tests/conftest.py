"""Shared fixtures: small raw CSV snippets and a cleaned fixture directory."""
from __future__ import annotations

import io
import sys

import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion after the run.

    Emitted here (not inside the tests) so the lines survive pytest's
    output capture and always land in the terminal / teed log.
    """
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(f"ACCEPTANCE {n}: {results[n]}")

TAXI_HEADER = (
    "pickup_datetime,dropoff_datetime,passenger_count,trip_time_in_secs,"
    "trip_distance,pickup_longitude,pickup_latitude,dropoff_longitude,dropoff_latitude"
)


def taxi_csv(rows: list[str]) -> io.BytesIO:
    """Raw taxi CSV bytes with the 2013 export header."""
    text = TAXI_HEADER + "\n" + "\n".join(rows) + ("\n" if rows else "")
    return io.BytesIO(text.encode())


FOOD_HEADER = "user_id,item_id,category_id,restaurant_id,cuisine_id,day_of_week,hour_of_day,item_count"


def food_csv(rows: list[str]) -> io.BytesIO:
    text = FOOD_HEADER + "\n" + "\n".join(rows) + ("\n" if rows else "")
    return io.BytesIO(text.encode())


@pytest.fixture
def valid_taxi_row() -> str:
    return (
        "2013-01-15 08:30:00,2013-01-15 08:45:00,1,900,2.5,"
        "-73.98,40.75,-73.97,40.76"
    )


@pytest.fixture(scope="session")
def synth_inputs(tmp_path_factory):
    """One month of synthetic taxi + food order data, with injected dirt."""
    from mobfc.synth import make_food_csv, make_taxi_csv

    d = tmp_path_factory.mktemp("inputs")
    taxi = d / "taxi.csv"
    food = d / "food.csv"
    make_taxi_csv(taxi, n_rows=2500, seed=0, malformed_rate=0.01, duplicate_rate=0.005)
    make_food_csv(food, n_rows=600, seed=0, malformed_rate=0.01)
    return taxi, food


@pytest.fixture(scope="session")
def pipeline_run(synth_inputs, tmp_path_factory):
    """A completed end-to-end pipeline run over the synthetic inputs."""
    from mobfc.cli import main

    taxi, food = synth_inputs
    out = tmp_path_factory.mktemp("pipeline") / "out"
    rc = main(
        [
            "run-all",
            "--input-taxi", str(taxi),
            "--input-food", str(food),
            "--out", str(out),
            "--seed", "0",
            "--quiet",
        ]
    )
    assert rc == 0, "pipeline fixture run failed"
    return out
