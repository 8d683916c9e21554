import csv
import json
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

DATA_DIR = Path(os.environ.get("PLSM_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("PLSM_CLI")
    if not path:
        pytest.skip("PLSM_CLI is not set")
    return path


@pytest.fixture
def run(cli, tmp_path):
    def _run(*args, check=True):
        proc = subprocess.run([cli, *map(str, args)], capture_output=True, text=True, cwd=tmp_path)
        if check and proc.returncode != 0:
            raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
        return proc

    return _run


def mesh_points(mesh_id, n, seed):
    verts = np.loadtxt(DATA_DIR / "meshes" / f"{mesh_id}_vertices.csv", delimiter=",", skiprows=1)
    tris = np.loadtxt(DATA_DIR / "meshes" / f"{mesh_id}_triangles.csv", delimiter=",", skiprows=1, dtype=int)
    rng = np.random.default_rng(seed)
    a = verts[tris[:, 0]]
    b = verts[tris[:, 1]]
    c = verts[tris[:, 2]]
    area = 0.5 * np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))
    k = rng.choice(len(tris), size=n, p=area / area.sum())
    w = rng.dirichlet([1.0, 1.0, 1.0], size=n) * 0.98 + 0.02 / 3
    return w[:, :1] * a[k] + w[:, 1:2] * b[k] + w[:, 2:] * c[k]


def write_csv(path, columns):
    names = list(columns)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(names)
        for row in zip(*(columns[c] for c in names)):
            writer.writerow([repr(float(v)) for v in row])
    return path


def read_csv(path):
    with open(path) as f:
        return list(csv.DictReader(f))


@pytest.fixture
def dataset(tmp_path):
    pts = mesh_points("tri2", 300, 1)
    rng = np.random.default_rng(2)
    z = rng.normal(size=(300, 4))
    y = 1.0 * z[:, 0] - 0.8 * z[:, 2] + np.sin(pts[:, 0]) + 0.2 * pts[:, 1] + 0.2 * rng.normal(size=300)
    cols = {"lon": pts[:, 0], "lat": pts[:, 1], "y": y}
    cols.update({f"z{j + 1}": z[:, j] for j in range(4)})
    return write_csv(tmp_path / "data.csv", cols)


def load_json(path):
    return json.loads(Path(path).read_text())
