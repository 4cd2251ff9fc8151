"""Small synthetic problems shared by the test modules."""
import numpy as np

from mpwtsvm.data import MultiViewDataset


def blobs(n_per_class=100, dim=2, separation=6.0, seed=0):
    """Two isotropic unit-variance Gaussian blobs whose centers are `separation` apart."""
    rng = np.random.default_rng(seed)
    shift = np.full(dim, separation / np.sqrt(dim))
    x = np.vstack([rng.standard_normal((n_per_class, dim)), rng.standard_normal((n_per_class, dim)) + shift])
    y = np.r_[np.ones(n_per_class), -np.ones(n_per_class)]
    return x, y


def two_view_blobs(n_per_class=100, separation=6.0, seed=0, dim_a=2, dim_b=2):
    xa, y = blobs(n_per_class, dim_a, separation, seed)
    xb, _ = blobs(n_per_class, dim_b, separation, seed + 1000)
    return MultiViewDataset(xa, xb, y)


def duplicated_view(n_per_class=100, separation=6.0, seed=0):
    x, y = blobs(n_per_class, 2, separation, seed)
    return MultiViewDataset(x, x.copy(), y)


def xor_cross(per_corner=25, noise=0.05, seed=0):
    """Four noisy corners of the unit square; diagonal corners share a label."""
    rng = np.random.default_rng(seed)
    corners = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    x = np.vstack([c + noise * rng.standard_normal((per_corner, 2)) for c in corners])
    y = np.r_[np.ones(2 * per_corner), -np.ones(2 * per_corner)]
    return x, y


def write_dataset(tmp_path, ds, prefix=""):
    pa, pb, py = tmp_path / f"{prefix}a.csv", tmp_path / f"{prefix}b.csv", tmp_path / f"{prefix}y.txt"
    np.savetxt(pa, ds.view_a, delimiter=",", fmt="%.17g")
    np.savetxt(pb, ds.view_b, delimiter=",", fmt="%.17g")
    py.write_text("".join("+1\n" if v > 0 else "-1\n" for v in ds.labels))
    return pa, pb, py
