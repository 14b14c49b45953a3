"""Image I/O, synthetic covers and experiment sweeps."""
import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import theory
from .attack import GridKeySpace, correlation_attack, score_key
from .codec import CapacityError, EmbedConfig, KeyCandidate, embed
from .image import GrayImage
from .noise import compute_noise
from .stats import InfeasiblePlanError, build_mixture, plan_attack


class PGMError(ValueError):
    pass


class PGMFormatError(PGMError):
    """Header is not a well-formed binary PGM header."""


class UnsupportedPGMError(PGMError):
    """Valid PNM variant we do not handle (ASCII, colour, 16-bit)."""


class TruncatedPGMError(PGMError):
    pass


def _header_tokens(data):
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise PGMFormatError("header ends early")
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise PGMFormatError("unterminated comment in header")
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PGMFormatError("missing whitespace after maxval")
    return tokens, pos + 1


def parse_pgm(data):
    magic = data[:2]
    if magic in (b"P1", b"P2", b"P3", b"P4", b"P6"):
        raise UnsupportedPGMError(f"unsupported PNM format {magic.decode()}; only binary P5 is read")
    if magic != b"P5":
        raise PGMFormatError("not a PGM file (missing P5 magic)")
    (_, w, h, maxval), offset = _header_tokens(data)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise PGMFormatError(f"non-numeric header field in {w!r} {h!r} {maxval!r}") from None
    if width < 1 or height < 1:
        raise PGMFormatError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedPGMError(f"maxval {maxval} not supported; expected 255")
    payload = data[offset : offset + width * height]
    if len(payload) < width * height:
        raise TruncatedPGMError(f"expected {width * height} pixel bytes, found {len(payload)}")
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width))


def read_pgm(path):
    with open(path, "rb") as f:
        return parse_pgm(f.read())


def pgm_bytes(image):
    return b"P5\n%d %d\n255\n" % (image.width, image.height) + image.pixels.tobytes()


def write_pgm(image, path):
    with open(path, "wb") as f:
        f.write(pgm_bytes(image))


def synth_cover(width=480, height=320, base=128.0, texture_sigma=1.5, gen_seed=0, field_amplitude=24.0):
    """Smooth low-frequency field plus white Gaussian texture, rounded to uint8."""
    if texture_sigma < 0:
        raise ValueError("texture_sigma must be >= 0")
    if texture_sigma == 0:
        return GrayImage(np.full((height, width), int(np.clip(round(base), 0, 255)), dtype=np.uint8))
    rng = np.random.default_rng(gen_seed)
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    field = np.zeros((height, width))
    for _ in range(3):
        wavelength = rng.uniform(80.0, 240.0)
        angle = rng.uniform(0.0, math.pi)
        phase = rng.uniform(0.0, 2 * math.pi)
        k = 2 * math.pi / wavelength
        field += np.sin(k * (x * math.cos(angle) + y * math.sin(angle)) + phase)
    field *= field_amplitude / 3.0
    values = base + field + rng.normal(0.0, texture_sigma, size=(height, width))
    return GrayImage(np.clip(np.rint(values), 0, 255).astype(np.uint8))


def random_message(n_bits, rng):
    return rng.integers(0, 2, size=n_bits, dtype=np.uint8)


def redundancy_curve(rates):
    rows = []
    for r in rates:
        c = theory.hiding_capacity(r / 2)
        rows.append({"r": r, "capacity": c, "message_rate": r, "redundancy": theory.hiding_redundancy(r)})
    return rows


def nstar_curve(rates, sigma, keyspace_size, p_m=0.01, A=0.5):
    rows = []
    for r in rates:
        model = build_mixture(r, sigma, A)
        try:
            plan = plan_attack(model, keyspace_size, p_m)
        except InfeasiblePlanError:
            rows.append({"r": r, "n": "inf", "T": "inf", "n_star": "inf"})
            continue
        rows.append({"r": r, "n": plan.n, "T": plan.T, "n_star": plan.n_star})
    return rows


@dataclass
class SweepRow:
    message_len_bytes: int
    r: float
    n_planned: Optional[int]
    T: Optional[float]
    t_k0: Optional[int]
    outcome: str
    stage: Optional[str]
    success: bool
    seed: int
    trial: int
    sigma: Optional[float] = None
    note: str = ""


SWEEP_COLUMNS = ("message_len_bytes", "r", "n_planned", "T", "t_k0", "result", "stage")


def _fmt(v, spec):
    return "--" if v is None else format(v, spec)


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow(
            [
                row.message_len_bytes,
                f"{row.r:.4f}",
                _fmt(row.n_planned, "d"),
                _fmt(row.T, ".2f"),
                _fmt(row.t_k0, "d"),
                "Succeed" if row.success else "Fail",
                row.stage or "--",
            ]
        )
    return buf.getvalue()


def rows_csv(rows, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def run_sweep(cover, lengths, seed_bits=12, trials=1, config=EmbedConfig(), gen_seed=0, threads=1, p_m=0.01):
    """Embed-then-attack for each length, with the true length known.

    Each trial draws a fresh seed and message. Rows whose attack went straight
    to the max stage carry ``None`` for n, T and the correct-key count.
    """
    rng = np.random.default_rng(gen_seed)
    eligible = config.eligible(cover.size)
    rows = []
    for L in lengths:
        for trial in range(trials):
            seed = int(rng.integers(0, 1 << seed_bits))
            rate = 8 * L / eligible
            if 8 * L > eligible:
                rows.append(SweepRow(L, rate, None, None, None, "skipped", None, False, seed, trial,
                                     note=str(CapacityError(8 * L, eligible))))
                continue
            key = KeyCandidate(seed, L)
            stego = embed(cover, random_message(8 * L, rng), key, config)
            noise = compute_noise(stego, 1, config.skip)
            result = correlation_attack(
                stego, GridKeySpace(seed_bits, [L]), config, rate=rate, p_m=p_m, threads=threads, noise=noise
            )
            n_planned = T = t_k0 = None
            if result.plan is not None and result.plan["n"] <= 8 * L:
                n_planned = result.plan["n"]
                T = result.plan["T"]
                t_k0 = score_key(noise, key, n_planned, config=config).t_k
            rows.append(
                SweepRow(
                    L,
                    rate,
                    n_planned,
                    T,
                    t_k0,
                    result.outcome,
                    result.stage,
                    result.recovered == key,
                    seed,
                    trial,
                    sigma=result.estimates.get("sigma"),
                )
            )
    return rows


def row_dict(row):
    return asdict(row)
