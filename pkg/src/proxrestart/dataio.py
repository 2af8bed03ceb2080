"""Dataset handling: LIBSVM text format, synthetic generators, bundled fixtures.

The LIBSVM format is one sample per line, ``label idx:val idx:val ...``
with 1-based, strictly increasing feature indices. Indices are mapped to
0-based columns internally. Real benchmark datasets are not bundled (use
:func:`load_libsvm` on a downloaded copy); desk-scale synthetic stand-ins
with a similar sparse texture are generated deterministically per seed,
and one 200x30 instance per kind ships with the package.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

from .linalg import CsrMatrix

__all__ = [
    "Dataset",
    "ParseError",
    "parse_libsvm",
    "load_libsvm",
    "serialize_libsvm",
    "dump_libsvm",
    "generate_synthetic",
    "LassoGroundTruth",
    "SYNTHETIC_KINDS",
    "fixture_path",
    "fixture_dataset",
]

SYNTHETIC_KINDS = ("logistic_sep", "robust_outliers", "lasso_known")

# Synthetic feature texture: sparse Gaussian entries, scaled so the
# objectives' Lipschitz constants land near the unit stepsizes used by
# the experiment-mode benchmarks. Logistic columns get a geometric scale
# spread (real sparse benchmark features have wildly uneven column
# frequencies), which keeps the instance unconverged long enough for
# restart schedules to separate.
_DENSITY = 0.3
_LOGISTIC_SCALE = 4.0
_LOGISTIC_COLUMN_SPREAD = 1000.0
_ROBUST_SCALE = 1.0


class ParseError(ValueError):
    """Malformed LIBSVM input; the message names the offending line."""


@dataclass(frozen=True)
class Dataset:
    features: CsrMatrix
    labels: np.ndarray
    name: str
    kind: str  # "classification" | "regression"

    def __post_init__(self):
        if len(self.labels) != self.features.n_rows:
            raise ValueError("label count does not match the number of rows")
        if self.kind == "classification" and not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("classification labels must be -1/+1")

    @property
    def n_rows(self) -> int:
        return self.features.n_rows

    @property
    def n_cols(self) -> int:
        return self.features.n_cols

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.kind == other.kind
            and self.features == other.features
            and np.array_equal(self.labels, other.labels)
        )


def _classify_kind(labels: np.ndarray) -> str:
    if len(labels) and np.all(np.isin(labels, (-1.0, 1.0))):
        return "classification"
    return "regression"


def parse_libsvm(lines, expected_dim: int | None = None, name: str = "libsvm") -> Dataset:
    """Parse LIBSVM-format text into a :class:`Dataset`.

    Parameters
    ----------
    lines : iterable of str
        The input, one sample per nonempty line (an open text file works).
    expected_dim : int, optional
        Lower bound on the feature dimension; the result has
        ``max(largest index seen, expected_dim)`` columns.

    Raises
    ------
    ParseError
        On a nonnumeric token, a nonincreasing feature index, or an index
        below 1 -- the message carries the 1-based line number and token.
    """
    labels = []
    row_ptr = [0]
    col_idx: list[int] = []
    vals: list[float] = []
    max_index = 0

    for lineno, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise ParseError(f"line {lineno}: nonnumeric label {tokens[0]!r}") from None
        prev_index = 0
        for token in tokens[1:]:
            idx_s, sep, val_s = token.partition(":")
            if not sep:
                raise ParseError(f"line {lineno}: malformed feature token {token!r}")
            try:
                index = int(idx_s)
            except ValueError:
                raise ParseError(f"line {lineno}: nonnumeric index in token {token!r}") from None
            try:
                value = float(val_s)
            except ValueError:
                raise ParseError(f"line {lineno}: nonnumeric value in token {token!r}") from None
            if index < 1:
                raise ParseError(f"line {lineno}: feature index must be >= 1 in token {token!r}")
            if index <= prev_index:
                raise ParseError(f"line {lineno}: nonincreasing feature index in token {token!r}")
            prev_index = index
            col_idx.append(index - 1)
            vals.append(value)
        row_ptr.append(len(vals))
        max_index = max(max_index, prev_index)

    dim = max(max_index, expected_dim or 0)
    features = CsrMatrix(len(labels), dim, row_ptr, col_idx, vals)
    labels = np.array(labels, dtype=np.float64)
    return Dataset(features, labels, name, _classify_kind(labels))


def load_libsvm(path, expected_dim: int | None = None) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, expected_dim=expected_dim, name=str(path))


def serialize_libsvm(dataset: Dataset) -> str:
    """Render a dataset back to LIBSVM text (1-based indices, exact floats)."""
    A = dataset.features
    out = []
    for i in range(A.n_rows):
        parts = [repr(float(dataset.labels[i]))]
        for p in range(A.row_ptr[i], A.row_ptr[i + 1]):
            parts.append(f"{A.col_idx[p] + 1}:{float(A.vals[p])!r}")
        out.append(" ".join(parts))
    return "\n".join(out) + ("\n" if out else "")


def dump_libsvm(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_libsvm(dataset))


@dataclass(frozen=True)
class LassoGroundTruth:
    """Reference solution of a generated lasso instance."""

    x_ref: np.ndarray
    l1_weight: float


def _sparse_gaussian(rng, n, d, density, scale) -> np.ndarray:
    mask = rng.random((n, d)) < density
    return np.where(mask, rng.standard_normal((n, d)) * scale, 0.0)


def _make_logistic(rng, n, d, label_noise, margin):
    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    labels = rng.choice((-1.0, 1.0), size=n)
    features = _sparse_gaussian(rng, n, d, _DENSITY, _LOGISTIC_SCALE)
    # Plant the separator on each row's support so the sparse texture stays.
    support = features != 0.0
    features += support * (margin * labels[:, None] * w[None, :])
    features *= np.geomspace(1.0 / np.sqrt(_LOGISTIC_COLUMN_SPREAD), 1.0, d)[None, :]
    if label_noise > 0.0:
        flips = rng.random(n) < label_noise
        labels = np.where(flips, -labels, labels)
    return features, labels


def _make_robust(rng, n, d, outlier_frac):
    w = rng.standard_normal(d)
    features = _sparse_gaussian(rng, n, d, _DENSITY, _ROBUST_SCALE)
    targets = features @ w + 0.05 * rng.standard_normal(n)
    n_out = int(round(outlier_frac * n))
    if n_out:
        rows = rng.choice(n, size=n_out, replace=False)
        targets[rows] += rng.choice((-1.0, 1.0), size=n_out) * rng.uniform(5.0, 15.0, size=n_out)
    return features, targets


def _make_lasso(rng, n, d, condition, noise):
    # Controlled spectrum: singular values of A/sqrt(n) geometric in
    # [1/sqrt(condition), 1], so the quadratic term has curvature in
    # [1/condition, 1]. The planted solution is dense, which keeps the
    # active set large enough to see the spectrum's low end; the resulting
    # linear convergence regime then stays observable over a desk-scale
    # run instead of terminating at machine precision within a few dozen
    # periods.
    gu = rng.standard_normal((n, d))
    gv = rng.standard_normal((d, d))
    U, _ = np.linalg.qr(gu)
    V, _ = np.linalg.qr(gv)
    sigma = np.sqrt(np.geomspace(1.0 / condition, 1.0, d)) * np.sqrt(n)
    A = (U * sigma) @ V.T
    x_true = rng.choice((-1.0, 1.0), size=d) * rng.uniform(0.5, 1.5, size=d)
    b = A @ x_true + noise * rng.standard_normal(n)
    return A, b


def _lasso_reference(dataset: Dataset, l1_weight: float) -> np.ndarray:
    # Local import: the solver package depends on this module's siblings,
    # not on dataio itself, so there is no cycle.
    from .objectives import QuadraticObjective
    from .regularizers import L1
    from .solver import SolverConfig, run_baseline

    obj = QuadraticObjective(dataset.features, dataset.labels)
    cfg = SolverConfig(max_iters=100_000, stepsize_mode="theory", tolerance=1e-14)
    trace = run_baseline("prox_grad", obj, L1(l1_weight), cfg, np.zeros(dataset.n_cols))
    return trace.final_x


def generate_synthetic(kind: str, n: int, d: int, seed: int, *,
                       label_noise: float = 0.1, margin: float = 1.0,
                       outlier_frac: float = 0.1, condition: float = 100.0,
                       noise: float = 0.01, l1_weight: float | None = None):
    """Generate a desk-scale synthetic dataset, deterministic per seed.

    Kinds
    -----
    ``"logistic_sep"``
        Sparse Gaussian features with a planted separator and
        ``label_noise`` label flips (classification).
    ``"robust_outliers"``
        Sparse linear data where ``outlier_frac`` of the targets are
        grossly corrupted -- the setting the robust regression loss is
        made for (regression).
    ``"lasso_known"``
        A least-squares + L1 instance with spectrum spread over
        ``[1/condition, 1]``. Returns ``(dataset, LassoGroundTruth)``
        where the reference solution comes from a long proximal gradient
        run; every other kind returns just the dataset. ``l1_weight``
        defaults to 5% of the smallest weight that zeroes the solution.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "logistic_sep":
        features, labels = _make_logistic(rng, n, d, label_noise, margin)
        ds = Dataset(CsrMatrix.from_dense(features), labels,
                     f"logistic_sep-{n}x{d}-seed{seed}", "classification")
        return ds
    if kind == "robust_outliers":
        features, targets = _make_robust(rng, n, d, outlier_frac)
        return Dataset(CsrMatrix.from_dense(features), targets,
                       f"robust_outliers-{n}x{d}-seed{seed}", "regression")
    if kind == "lasso_known":
        A, b = _make_lasso(rng, n, d, condition, noise)
        ds = Dataset(CsrMatrix.from_dense(A), b,
                     f"lasso_known-{n}x{d}-seed{seed}", "regression")
        if l1_weight is None:
            l1_weight = 0.05 * float(np.max(np.abs(A.T @ b))) / n
        x_ref = _lasso_reference(ds, l1_weight)
        return ds, LassoGroundTruth(x_ref, l1_weight)
    raise ValueError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")


def fixture_path(kind: str):
    """Path to the bundled 200x30 fixture file for ``kind``."""
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"unknown fixture kind {kind!r}")
    return importlib.resources.files("proxrestart").joinpath(f"data/{kind}.libsvm")


def fixture_dataset(kind: str) -> Dataset:
    """Load the bundled fixture for ``kind`` (parsed from LIBSVM text)."""
    with fixture_path(kind).open("r", encoding="utf-8") as fh:
        return parse_libsvm(fh, name=kind)
