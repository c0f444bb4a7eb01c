import numpy as np
import pytest

from rdw3r.kinematics import ManipulatorType

# representative geometries, one per well-connected type
DESIGNS = {
    "B1": ManipulatorType.B1.geometry(d3=4.0, d4=2.2),
    "C": ManipulatorType.C.geometry(r2=4.0, d4=4.0),
    "E": ManipulatorType.E.geometry(d2=4.0, d4=4.0),
    "G": ManipulatorType.G.geometry(d3=4.0, d4=2.5, r3=1.0),
    "H": ManipulatorType.H.geometry(r2=4.0, d4=4.0, r3=1.0),
}

WORKED = ManipulatorType.C.geometry(d4=1.5, r2=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_geometry(mtype: ManipulatorType, rng: np.random.Generator):
    """Random lengths in [0.3, 4] honouring the type's zero pattern."""
    while True:
        lengths = {name: float(rng.uniform(0.3, 4.0)) for name in mtype.value}
        if mtype is ManipulatorType.B1 and lengths["d3"] <= 1.05 * lengths["d4"]:
            continue
        return mtype.geometry(**lengths)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def record(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
