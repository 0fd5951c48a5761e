"""Column contracts for the simulator's CSV artifacts.

The plotting tool reads files by header, never by position, and checks
the header against the expected schema before touching any data.  A
mismatch is reported with every missing column named, so a file from an
older or foreign tool fails loudly instead of plotting garbage.
"""

import csv

TRAJECTORY_COLUMNS = (
    "t_day", "w_kcal", "xi_kcal", "p_count", "f", "T_c", "DO_mgL",
    "UIA_mgL", "tau", "sigma", "v", "k1", "reward", "J_mpc", "chosen_by",
)
ENV_COLUMNS = ("t_day", "T_c", "DO_mgL", "UIA_mgL", "rho")
METRICS_COLUMNS = ("controller", "metric", "value")
RETURNS_COLUMNS = ("episode", "return")


class SchemaError(Exception):
    """A CSV whose header lacks required columns."""

    def __init__(self, path, missing):
        self.path = str(path)
        self.missing = tuple(missing)
        cols = ", ".join(self.missing)
        super().__init__(f"{self.path}: missing column(s): {cols}")


class EmptyInputError(Exception):
    """A CSV with a valid header but no data rows."""

    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"{self.path}: no data rows")


def read_columns(path, required):
    """Raw string columns keyed by name; header checked before data.

    Only ``required`` names must be present, extra columns are kept, so
    a newer file with added columns still renders.
    """
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0] if rows else []
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(path, missing)
    data = rows[1:]
    if not data:
        raise EmptyInputError(path)
    cols = {name: [] for name in header}
    for row in data:
        for name, val in zip(header, row):
            cols[name].append(val)
    return cols


def floats(column):
    """Parse one raw column; empty cells become None."""
    return [None if v == "" else float(v) for v in column]


def paired(xs, ys):
    """Keep (x, y) rows where both cells held a value."""
    keep = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None]
    return [x for x, _ in keep], [y for _, y in keep]
