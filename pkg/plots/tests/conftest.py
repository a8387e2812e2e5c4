import csv

import numpy as np
import pytest


def write_velocity_csv(path, t, commanded, measured):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "vx_commanded", "vx_measured"))
        for row in zip(t, commanded, measured):
            writer.writerow([f"{v:.17g}" for v in row])


MATRIX_HEADER = ("scenario_id", "frequency_hz", "d_static_n", "amplitude_n",
                 "mode", "mse_vx_x1000", "failed")

# six scenarios, three modes; s3 carries a deliberate displayed-precision tie
MATRIX_ROWS = [
    ("s1", 0.33, 0.0, 15.0, "off", 9.460, 0),
    ("s1", 0.33, 0.0, 15.0, "static", 9.449, 0),
    ("s1", 0.33, 0.0, 15.0, "periodic", 3.112, 0),
    ("s2", 0.33, 0.0, 10.0, "off", 5.148, 0),
    ("s2", 0.33, 0.0, 10.0, "static", 5.144, 0),
    ("s2", 0.33, 0.0, 10.0, "periodic", 2.265, 0),
    ("s3", 0.33, -10.0, 0.0, "off", 1.4860004, 0),
    ("s3", 0.33, -10.0, 0.0, "static", 1.4859996, 0),
    ("s3", 0.33, -10.0, 0.0, "periodic", 1.844, 0),
    ("s4", 0.33, -7.0, 10.0, "off", 5.110, 0),
    ("s4", 0.33, -7.0, 10.0, "static", 5.449, 0),
    ("s4", 0.33, -7.0, 10.0, "periodic", 2.302, 0),
    ("s5", 0.33, -10.0, 15.0, "off", 11.270, 0),
    ("s5", 0.33, -10.0, 15.0, "static", 10.931, 0),
    ("s5", 0.33, -10.0, 15.0, "periodic", 3.287, 0),
    ("s6", 0.5, -10.0, 15.0, "off", 13.185, 0),
    ("s6", 0.5, -10.0, 15.0, "static", 13.614, 1),
    ("s6", 0.5, -10.0, 15.0, "periodic", 3.734, 0),
]


def write_matrix_csv(path, rows=MATRIX_ROWS):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MATRIX_HEADER)
        writer.writerows(rows)


@pytest.fixture
def three_mode_dir(tmp_path):
    """A harness-shaped output directory for one scenario, three modes."""
    t = np.arange(200) * 0.03
    commanded = np.where(t < 2.0, 0.0, np.where(t < 4.0, 0.3, 0.6))
    rng = np.random.default_rng(5)
    for mode, wobble in (("off", 0.05), ("static", 0.03), ("periodic", 0.01)):
        measured = commanded + wobble * np.sin(2 * np.pi * 0.33 * t) \
            + 0.002 * rng.standard_normal(t.size)
        write_velocity_csv(tmp_path / f"plot_s1_{mode}.csv", t, commanded, measured)
    write_matrix_csv(tmp_path / "matrix.csv")
    return tmp_path
