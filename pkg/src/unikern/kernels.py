"""Kernel matrix construction, normalization, combination, and caching.

Samples are the columns of the data matrix X (features x samples). The
standard experimental bank holds 12 kernels: seven Gaussians
K(x, y) = exp(-||x - y||^2 / (t * dmax^2)) with dmax the largest pairwise
distance and t in {0.01, 0.05, 0.1, 1, 10, 50, 100}, a linear kernel
x^T y, and four polynomial kernels (a + x^T y)^b with (a, b) in
{(0,2), (0,4), (1,2), (1,4)}. Every bank member is rescaled so its largest
entry is exactly 1.

Cache file layout (all little-endian): magic "UKRN", format version u32,
sample count u64, kind tag u8 (0 gaussian, 1 linear, 2 polynomial),
kind parameters as f64 (gaussian: t; polynomial: a, b; linear: none),
normalized flag u8, then n*n f64 entries row-major. Round-trips are
bit-exact.
"""

import struct
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import DataError
from .numerics import as_matrix, ensure_symmetric

GAUSSIAN_T = (0.01, 0.05, 0.1, 1.0, 10.0, 50.0, 100.0)
POLYNOMIAL_AB = ((0.0, 2), (0.0, 4), (1.0, 2), (1.0, 4))
PSD_RTOL = 1e-8

_MAGIC = b"UKRN"
_VERSION = 1
_TAGS = {"gaussian": 0, "linear": 1, "polynomial": 2}
_KINDS = {v: k for k, v in _TAGS.items()}


@dataclass(frozen=True)
class KernelSpec:
    """One kernel function: gaussian(t), linear, or polynomial(a, b)."""

    kind: str
    t: float | None = None
    a: float | None = None
    b: int | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.t is None or self.t <= 0:
                raise ValueError("gaussian kernel requires t > 0")
        elif self.kind == "linear":
            pass
        elif self.kind == "polynomial":
            if self.a is None or self.a not in (0.0, 1.0):
                raise ValueError("polynomial kernel requires a in {0, 1}")
            if self.b is None or int(self.b) < 1:
                raise ValueError("polynomial kernel requires integer b >= 1")
        else:
            raise ValueError(f"unknown kernel kind: {self.kind!r}")

    def label(self):
        if self.kind == "gaussian":
            return f"gaussian(t={self.t:g})"
        if self.kind == "polynomial":
            return f"polynomial(a={self.a:g},b={self.b})"
        return "linear"


def gaussian(t):
    return KernelSpec("gaussian", t=float(t))


def linear():
    return KernelSpec("linear")


def polynomial(a, b):
    return KernelSpec("polynomial", a=float(a), b=int(b))


@dataclass
class KernelMatrix:
    """A symmetric PSD Gram matrix over n samples.

    spec is None for combined kernels, which therefore cannot be cached.
    """

    n: int
    K: np.ndarray
    spec: KernelSpec | None
    normalized: bool = False


def build_kernel(X, spec):
    """Evaluate one kernel on the columns of X (features x samples)."""
    X = as_matrix(X, "data matrix")
    n = X.shape[1]
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    G = X.T @ X
    if spec.kind == "gaussian":
        sq = np.diag(G)[:, None] + np.diag(G)[None, :] - 2.0 * G
        np.maximum(sq, 0.0, out=sq)
        d2max = sq.max()
        if d2max <= 0.0:
            raise DataError(
                "all samples are identical: gaussian kernel is degenerate "
                "(maximal pairwise distance is 0)"
            )
        K = np.exp(-sq / (spec.t * d2max))
    elif spec.kind == "linear":
        K = G
    else:
        K = (spec.a + G) ** spec.b
    K = (K + K.T) / 2.0
    return KernelMatrix(n=n, K=K, spec=spec, normalized=False)


def normalize_kernel(km):
    """Rescale so the largest entry is exactly 1."""
    if km.normalized:
        raise ValueError("kernel is already normalized")
    mx = km.K.max()
    if mx <= 0.0:
        raise ValueError("cannot normalize: kernel has no positive entry")
    return replace(km, K=km.K / mx, normalized=True)


def repair_psd(km):
    """Clip tiny negative eigenvalues born of round-off; reject real ones.

    A smallest eigenvalue below -PSD_RTOL * ||K||_inf is not round-off and
    indicates a construction bug, so it is rejected rather than repaired.
    """
    K = ensure_symmetric(km.K, "kernel")
    vals, vecs = scipy.linalg.eigh(K)
    scale = np.abs(K).sum(axis=1).max()
    if vals[0] >= 0.0:
        return km
    if vals[0] < -PSD_RTOL * max(scale, 1e-300):
        raise ValueError(
            f"kernel is indefinite beyond round-off: smallest eigenvalue "
            f"{vals[0]:.3e} < -{PSD_RTOL:.0e} * ||K||_inf"
        )
    Kp = (vecs * np.maximum(vals, 0.0)) @ vecs.T
    Kp = (Kp + Kp.T) / 2.0
    return replace(km, K=Kp)


def standard_specs():
    """The fixed 12-kernel experimental lineup, in bank order."""
    specs = [gaussian(t) for t in GAUSSIAN_T]
    specs.append(linear())
    specs.extend(polynomial(a, b) for a, b in POLYNOMIAL_AB)
    return specs


@dataclass
class KernelBank:
    """An ordered collection of kernels over the same samples."""

    kernels: list

    def __post_init__(self):
        if len(self.kernels) < 1:
            raise ValueError("kernel bank must hold at least one kernel")
        n = self.kernels[0].n
        for km in self.kernels:
            if km.n != n:
                raise ValueError(
                    f"bank members disagree on sample count: {km.n} != {n}"
                )

    @property
    def n(self):
        return self.kernels[0].n

    @property
    def r(self):
        return len(self.kernels)

    def __len__(self):
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    def __getitem__(self, i):
        return self.kernels[i]


def standard_bank(X):
    """Build, PSD-repair, and normalize the standard 12-kernel bank."""
    members = [
        normalize_kernel(repair_psd(build_kernel(X, spec)))
        for spec in standard_specs()
    ]
    return KernelBank(members)


def bank_from_specs(X, specs):
    members = [
        normalize_kernel(repair_psd(build_kernel(X, spec))) for spec in specs
    ]
    return KernelBank(members)


def combine(bank, w):
    """Convex combination sum_i w_i K^i of the bank members.

    w is taken as a raw coefficient vector; only its length and finiteness
    are checked here, so callers own the simplex constraint.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != len(bank):
        raise ValueError(
            f"weight vector has length {w.size}, bank holds {len(bank)} kernels"
        )
    if not np.isfinite(w).all():
        raise ValueError("weights contain non-finite entries")
    Kw = np.zeros_like(bank[0].K)
    for wi, km in zip(w, bank):
        Kw += wi * km.K
    return KernelMatrix(n=bank.n, K=Kw, spec=None, normalized=False)


def check_weights(w, atol=1e-10):
    """Validate the kernel-weight invariants: w >= 0 and sum sqrt(w) = 1."""
    w = np.asarray(w, dtype=np.float64)
    if (w < 0).any():
        raise ValueError("kernel weights must be nonnegative")
    s = np.sqrt(w).sum()
    if abs(s - 1.0) > atol:
        raise ValueError(f"sum of sqrt(weights) is {s!r}, expected 1")
    return w


def save_kernel(km, path):
    """Write a kernel to the binary cache format (bit-exact round-trip)."""
    if km.spec is None:
        raise ValueError("combined kernels carry no spec and cannot be cached")
    tag = _TAGS[km.spec.kind]
    header = _MAGIC + struct.pack("<IQB", _VERSION, km.n, tag)
    if km.spec.kind == "gaussian":
        header += struct.pack("<d", km.spec.t)
    elif km.spec.kind == "polynomial":
        header += struct.pack("<dd", km.spec.a, float(km.spec.b))
    header += struct.pack("<B", 1 if km.normalized else 0)
    payload = np.ascontiguousarray(km.K, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_kernel(path):
    """Read a kernel written by save_kernel, with distinct failure modes."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != _MAGIC:
        raise DataError(f"{path}: bad magic bytes, not a kernel cache file")
    off = 4
    try:
        version, n, tag = struct.unpack_from("<IQB", blob, off)
    except struct.error as exc:
        raise DataError(f"{path}: truncated header") from exc
    off += struct.calcsize("<IQB")
    if version != _VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    if tag not in _KINDS:
        raise DataError(f"{path}: unknown kernel kind tag {tag}")
    if n < 1:
        raise DataError(f"{path}: invalid sample count {n}")
    kind = _KINDS[tag]
    try:
        if kind == "gaussian":
            (t,) = struct.unpack_from("<d", blob, off)
            off += 8
            spec = gaussian(t)
        elif kind == "polynomial":
            a, b = struct.unpack_from("<dd", blob, off)
            off += 16
            spec = polynomial(a, int(b))
        else:
            spec = linear()
        (norm_flag,) = struct.unpack_from("<B", blob, off)
        off += 1
    except struct.error as exc:
        raise DataError(f"{path}: truncated header") from exc
    expected = n * n * 8
    actual = len(blob) - off
    if actual < expected:
        raise DataError(
            f"{path}: truncated payload, expected {expected} bytes of "
            f"entries but found {actual}"
        )
    if actual > expected:
        raise DataError(
            f"{path}: payload size mismatch, expected {expected} bytes of "
            f"entries but found {actual}"
        )
    K = np.frombuffer(blob, dtype="<f8", count=n * n, offset=off)
    K = K.reshape(n, n).astype(np.float64)
    return KernelMatrix(n=int(n), K=K, spec=spec, normalized=bool(norm_flag))


def parse_spec(text):
    """Parse a CLI kernel argument: 'linear', 'gaussian:T', 'polynomial:A,B'."""
    head, _, rest = text.partition(":")
    head = head.strip().lower()
    try:
        if head == "linear":
            if rest:
                raise ValueError("linear kernel takes no parameters")
            return linear()
        if head == "gaussian":
            return gaussian(float(rest))
        if head in ("polynomial", "poly"):
            a, b = rest.split(",")
            return polynomial(float(a), int(b))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad kernel spec {text!r}: {exc}") from exc
    raise ValueError(f"bad kernel spec {text!r}: unknown kind {head!r}")
