"""Exact dynamic mode decomposition for equispaced snapshots.

The one-step operator A (x_{k+1} = A x_k) is approximated through the
truncated SVD of the first snapshot block: with S the columns 1..m-1 and
Sdot the columns 2..m, S ~ Ur Sr Vr*, the reduced operator is
Atilde = Ur* Sdot Vr Sr^-1, its eigendecomposition Atilde W = W Lambda gives
the mode matrix Theta = Sdot Vr Sr^-1 W, and the amplitudes solve
min || Theta b - x_1 ||_2.
"""

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ParseError, UnstableModelError

#: smallest singular value kept, relative to the largest
SINGULAR_CUTOFF = 1e-13

DEFAULT_ENERGY = 0.9999
DEFAULT_STEADY_TOL = 1e-3


@dataclass
class SnapshotSet:
    """n x m snapshot matrix; column k is the state at t0 + k dt."""

    data: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ArgumentError("snapshot data must be a 2-D matrix")
        n, m = self.data.shape
        if n < 1 or m < 2:
            raise ArgumentError(f"need n >= 1 and m >= 2 snapshots, got {n} x {m}")
        if self.dt <= 0:
            raise ArgumentError(f"dt must be positive, got {self.dt}")


@dataclass
class DMDModel:
    modes: np.ndarray  # (n, r) complex
    eigenvalues: np.ndarray  # (r,) complex, per-step multipliers
    amplitudes: np.ndarray  # (r,) complex
    rank: int
    dt: float
    t0: float

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(self.eigenvalues)))


def _resolve_rank(sigma, rank, n, m):
    max_rank = min(n, m - 1)
    if isinstance(rank, (int, np.integer)):
        if not 1 <= rank <= max_rank:
            raise ArgumentError(
                f"rank {rank} outside 1..{max_rank} for {n} x {m} snapshots"
            )
        r = int(rank)
    else:
        energy = float(rank)
        if not 0.0 < energy <= 1.0:
            raise ArgumentError(f"energy threshold {energy} outside (0, 1]")
        total = np.cumsum(sigma**2) / np.sum(sigma**2)
        r = int(np.searchsorted(total, energy - 1e-15) + 1)
        r = min(r, max_rank)
    usable = int(np.sum(sigma[:r] > SINGULAR_CUTOFF * sigma[0]))
    if usable < r:
        warnings.warn(
            f"singular values below {SINGULAR_CUTOFF:g} * sigma_1 inside the "
            f"requested rank; truncating {r} -> {usable}",
            stacklevel=3,
        )
        r = usable
    if r < 1:
        raise ArgumentError("snapshot matrix is numerically zero")
    return r


def fit(snapshots, rank=DEFAULT_ENERGY):
    """Fit a DMDModel; `rank` is an explicit integer or an energy fraction."""
    data = snapshots.data
    n, m = data.shape
    s_mat = data[:, :-1]
    sdot = data[:, 1:]

    u, sigma, vh = np.linalg.svd(s_mat, full_matrices=False)
    r = _resolve_rank(sigma, rank, n, m)
    ur = u[:, :r]
    vr = vh[:r].conj().T
    inv_sigma = np.diag(1.0 / sigma[:r])

    atilde = ur.conj().T @ sdot @ vr @ inv_sigma
    lam, w = np.linalg.eig(atilde)
    modes = sdot @ vr @ inv_sigma @ w

    amplitudes, *_ = np.linalg.lstsq(modes, data[:, 0], rcond=None)
    return DMDModel(
        modes=modes,
        eigenvalues=lam,
        amplitudes=amplitudes,
        rank=r,
        dt=snapshots.dt,
        t0=snapshots.t0,
    )


def reconstruct(model, k):
    """State at training step k >= 0: Re(Theta Lambda^k b)."""
    if k < 0:
        raise ArgumentError(f"step k must be >= 0, got {k}")
    return np.real(model.modes @ (model.eigenvalues**k * model.amplitudes))


def forecast(model, t):
    """State at time t >= t0 via the principal complex power Lambda^((t-t0)/dt)."""
    if t < model.t0:
        raise ArgumentError(f"t = {t} is before t0 = {model.t0}")
    steps = (t - model.t0) / model.dt
    powers = np.asarray(model.eigenvalues, dtype=complex) ** steps
    return np.real(model.modes @ (powers * model.amplitudes))


def steady_state(model, tol=DEFAULT_STEADY_TOL):
    """Asymptotic state: the sum of modes with |lambda - 1| < tol.

    Returns (state, diagnostics). Divergent modes (|lambda| > 1 + tol) make
    the limit undefined: they raise UnstableModelError when they carry
    amplitude above 1e-6 relative to the initial state, else they are listed
    in diagnostics and excluded from the sum.
    """
    if tol <= 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    lam = model.eigenvalues
    x1_norm = np.linalg.norm(reconstruct(model, 0))

    divergent = np.abs(lam) > 1.0 + tol
    if np.any(divergent):
        strengths = np.abs(model.amplitudes) * np.linalg.norm(model.modes, axis=0)
        offending = lam[divergent & (strengths > 1e-6 * max(x1_norm, 1e-300))]
        if offending.size:
            raise UnstableModelError(
                f"divergent DMD modes with non-negligible amplitude: "
                f"{offending.tolist()}",
                eigenvalues=offending,
            )

    steady = np.abs(lam - 1.0) < tol
    state = np.real(model.modes[:, steady] @ model.amplitudes[steady])
    if not np.any(steady):
        state = np.zeros(model.modes.shape[0])
    diagnostics = {
        "steady_mode_count": int(steady.sum()),
        "divergent_eigenvalues": lam[divergent].tolist(),
        "spectral_radius": model.spectral_radius,
    }
    return state, diagnostics


# ---------------------------------------------------------------------------
# Serialization

_BIN_MAGIC = b"HRSN"


def save_snapshots(snapshots, path, binary=False):
    """Text: '# dt <dt>' / '# t0 <t0>' headers, then the n x m matrix row by
    row. Binary: magic, n, m as int64 LE, dt, t0 as float64 LE, column-major
    doubles."""
    if binary:
        n, m = snapshots.data.shape
        with open(path, "wb") as fh:
            fh.write(_BIN_MAGIC)
            fh.write(struct.pack("<qqdd", n, m, snapshots.dt, snapshots.t0))
            fh.write(np.asfortranarray(snapshots.data).tobytes(order="F"))
    else:
        with open(path, "w") as fh:
            fh.write(f"# dt {snapshots.dt:.17g}\n# t0 {snapshots.t0:.17g}\n")
            np.savetxt(fh, snapshots.data, fmt="%.17g")


def load_snapshots(path, dt=None, t0=None):
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == _BIN_MAGIC:
            n, m, fdt, ft0 = struct.unpack("<qqdd", fh.read(32))
            raw = np.frombuffer(fh.read(), dtype="<f8")
            if raw.size != n * m:
                raise ParseError(f"{path}: expected {n * m} doubles, found {raw.size}")
            return SnapshotSet(raw.reshape((n, m), order="F"), dt=fdt, t0=ft0)
    # text layout
    with open(path) as fh:
        lines = fh.readlines()
    for line in lines:
        if line.startswith("#"):
            tokens = line[1:].split()
            if len(tokens) == 2 and tokens[0] in ("dt", "t0"):
                if tokens[0] == "dt" and dt is None:
                    dt = float(tokens[1])
                elif tokens[0] == "t0" and t0 is None:
                    t0 = float(tokens[1])
    if dt is None:
        raise ParseError(f"{path}: no dt header; pass dt explicitly")
    try:
        data = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return SnapshotSet(data, dt=dt, t0=t0 or 0.0)


def save_model(model, path):
    """Structured-text model file (r, dt, t0, eigenvalues, amplitudes, modes)."""
    n = model.modes.shape[0]
    out = [
        "hullrom-dmd-model",
        f"rank {model.rank}",
        f"n {n}",
        f"dt {model.dt:.17g}",
        f"t0 {model.t0:.17g}",
        "eigenvalues",
    ]
    for lam in model.eigenvalues:
        out.append(f"{lam.real:.17g} {lam.imag:.17g}")
    out.append("amplitudes")
    for b in model.amplitudes:
        out.append(f"{b.real:.17g} {b.imag:.17g}")
    out.append("modes")  # column-major, one (re, im) pair per line
    for col in model.modes.T:
        for z in col:
            out.append(f"{z.real:.17g} {z.imag:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def load_model(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "hullrom-dmd-model":
        raise ParseError(f"{path}:1: not a hullrom DMD model file")
    try:
        rank = int(lines[1].split()[1])
        n = int(lines[2].split()[1])
        dt = float(lines[3].split()[1])
        t0 = float(lines[4].split()[1])
        idx = lines.index("eigenvalues") + 1

        def complex_block(start, count):
            vals = []
            for ln in lines[start : start + count]:
                re, im = (float(t) for t in ln.split())
                vals.append(complex(re, im))
            return np.array(vals), start + count

        lam, idx = complex_block(idx, rank)
        idx = lines.index("amplitudes", idx - 1) + 1
        amps, idx = complex_block(idx, rank)
        idx = lines.index("modes", idx - 1) + 1
        flat, _ = complex_block(idx, rank * n)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed model file ({exc})") from exc
    modes = flat.reshape((rank, n)).T
    return DMDModel(
        modes=modes, eigenvalues=lam, amplitudes=amps, rank=rank, dt=dt, t0=t0
    )
