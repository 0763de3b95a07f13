import pytest
from hypothesis import HealthCheck, settings

from pcadrisk.kinematics import NeighbourKind, SceneSnapshot, Vec2, VehicleState

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def snapshot(xn, yn=0.0, vs=(27.78, 0.0), vn=(27.78, 0.0), an=(0.0, 0.0), kind=NeighbourKind.MOVING_VEHICLE):
    subject = VehicleState(Vec2(0.0, 0.0), Vec2(*vs))
    if kind is NeighbourKind.STATIC_OBJECT:
        neighbour = VehicleState(Vec2(xn, yn))
    else:
        neighbour = VehicleState(Vec2(xn, yn), Vec2(*vn), Vec2(*an))
    return SceneSnapshot(subject, neighbour, kind)


@pytest.fixture
def multi_options():
    # leader 50 m ahead (bumper to bumper) at half the subject's speed
    return snapshot(54.0, vs=(16.67, 0.0), vn=(8.33, 0.0))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
