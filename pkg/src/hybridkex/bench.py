"""Key-exchange benchmark reproducing the evaluation table's columns.

Timing covers the local cryptographic sequence only (hybrid keygen,
encapsulation, decapsulation, secret combination and KDF2 derivation); no
QKD and no network.  Byte accounting counts the key-share payloads of the
two flights, and packets are a per-flight ceiling at the MTU payload size.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import BenchError
from .hybrid_kex import SecretBundle, combine_secrets, derive_session_keys, hybrid_decapsulate, hybrid_encapsulate, hybrid_keygen
from .suites import HybridSuite, get_suite, list_suites

CSV_HEADER = ["function", "avg_ns", "std_ns", "max_ns", "min_ns", "bytes", "packets", "pqc_bits", "classical_bits", "verified"]
FORMATS = ("table", "csv", "json")
DEFAULT_MTU = 1500

# label -> (bytes transfer, packets at MTU 1500, PQC bits, classical bits)
REFERENCE_ACCOUNTING: dict[str, tuple[int, int, int, int]] = {
    "X25519-Kyber768-Draft00": (2336, 2, 192, 128),
    "X25519-MLKE512M-Draft00": (1632, 2, 128, 128),
    "X25519-MLKE768M-Draft00": (2336, 2, 192, 128),
    "X25519-MLKE1024M-Draft00": (3200, 4, 256, 128),
    "X448-MLKEM768-Draft00": (2384, 2, 192, 224),
    "X25519e-FrodoKEM976-SHAKEDraft00": (31440, 22, 192, 128),
    "X25519-FrodoKEM976-SHAKEDraft00": (31488, 22, 192, 128),
    "X25519e-FrodoKEM976-AESDraft00": (31440, 22, 192, 128),
    "X25519-FrodoKEM976-AESDraft00": (31488, 22, 192, 128),
    "X25519-Mceliece-Draft00": (200722, 139, 128, 128),
}


@dataclass(frozen=True)
class TimingStats:
    average_ns: float
    std_dev_ns: float
    max_ns: int
    min_ns: int
    iterations: int


@dataclass(frozen=True)
class BenchRow:
    label: str
    timing: TimingStats
    bytes_transfer: int
    packets: int
    strength_pqc: int
    strength_classical: int
    verified_accounting: bool

    def to_json(self) -> dict:
        return {
            "function": self.label,
            "avg_ns": self.timing.average_ns,
            "std_ns": self.timing.std_dev_ns,
            "max_ns": self.timing.max_ns,
            "min_ns": self.timing.min_ns,
            "bytes": self.bytes_transfer,
            "packets": self.packets,
            "pqc_bits": self.strength_pqc,
            "classical_bits": self.strength_classical,
            "verified": self.verified_accounting,
        }

    @classmethod
    def from_json(cls, obj: dict) -> BenchRow:
        timing = TimingStats(
            float(obj["avg_ns"]), float(obj["std_ns"]), int(obj["max_ns"]), int(obj["min_ns"]),
            int(obj.get("iterations", 0)),
        )
        return cls(
            obj["function"], timing, int(obj["bytes"]), int(obj["packets"]),
            int(obj["pqc_bits"]), int(obj["classical_bits"]), bool(obj["verified"]),
        )


@dataclass(frozen=True)
class BenchConfig:
    iterations: int = 100
    mtu: int = DEFAULT_MTU
    suites: tuple[str, ...] = ()
    warmup: int = 10
    output: str = "table"
    clock: Callable[[], int] = field(default=time.perf_counter_ns, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.iterations < 2:
            raise ValueError("iterations must be >= 2 for a sample standard deviation")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if self.mtu <= 0:
            raise ValueError("mtu must be positive")
        if self.output not in FORMATS:
            raise ValueError(f"output must be one of {FORMATS}")

    def selected(self) -> list[HybridSuite]:
        if not self.suites:
            return list_suites()
        wanted = {get_suite(s).id for s in self.suites}
        return [s for s in list_suites() if s.id in wanted]


def compute_stats(samples: Sequence[int | float]) -> TimingStats:
    """Mean, sample (n-1) standard deviation, max and min."""
    if len(samples) < 2:
        raise BenchError("need at least 2 samples")
    return TimingStats(
        average_ns=float(statistics.mean(samples)),
        std_dev_ns=float(statistics.stdev(samples)),
        max_ns=max(samples),
        min_ns=min(samples),
        iterations=len(samples),
    )


def account_bytes(suite: HybridSuite | str | int) -> tuple[int, int, int]:
    """(flight1, flight2, total) key-share bytes; total honours the override."""
    s = get_suite(suite)
    flight1 = s.classical.public_key_bytes + s.pq.public_key_bytes + s.extra_flight1_bytes
    flight2 = s.classical.public_key_bytes + s.pq.ciphertext_bytes
    total = s.accounting_override_total if s.accounting_override_total is not None else flight1 + flight2
    return flight1, flight2, total


def account_packets(flight_bytes: Iterable[int], mtu: int = DEFAULT_MTU) -> int:
    if mtu <= 0:
        raise ValueError("mtu must be positive")
    return sum(math.ceil(b / mtu) for b in flight_bytes)


def suite_accounting(suite: HybridSuite, mtu: int = DEFAULT_MTU) -> tuple[int, int, bool]:
    """(bytes, packets, verified) as reported in a row."""
    f1, f2, total = account_bytes(suite)
    if suite.unverified:
        packets = suite.accounting_override_packets
        if packets is None:
            packets = account_packets([total], mtu)
        return total, packets, False
    return total, account_packets([f1, f2], mtu), True


@dataclass(frozen=True)
class CheckResult:
    label: str
    column: str
    expected: int
    actual: int

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


def check_accounting(suites: Iterable[HybridSuite] | None = None, mtu: int = DEFAULT_MTU) -> list[CheckResult]:
    """Compare computed columns with the embedded table values.

    Rows with copied accounting only have their strength columns checked,
    and byte/packet checks only apply at the table's MTU of 1500.
    """
    out = []
    for s in suites or list_suites():
        exp_bytes, exp_packets, exp_pqc, exp_classical = REFERENCE_ACCOUNTING[s.label]
        total, packets, verified = suite_accounting(s, mtu)
        if verified:
            out.append(CheckResult(s.label, "bytes", exp_bytes, total))
            if mtu == DEFAULT_MTU:
                out.append(CheckResult(s.label, "packets", exp_packets, packets))
        out.append(CheckResult(s.label, "pqc_bits", exp_pqc, s.strength_pqc_bits))
        out.append(CheckResult(s.label, "classical_bits", exp_classical, s.strength_classical_bits))
    return out


_BENCH_TRANSCRIPT = hashlib.sha256(b"hybridkex bench transcript").digest()


def kex_once(suite: HybridSuite) -> bytes:
    """One full local key exchange; returns the encryption key."""
    pub, priv = hybrid_keygen(suite)
    ct, ecdh_a, kem_a = hybrid_encapsulate(suite, pub)
    ecdh_b, kem_b = hybrid_decapsulate(suite, priv, ct)
    ka = derive_session_keys(combine_secrets(SecretBundle(ecdh_a, kem_a)), _BENCH_TRANSCRIPT)
    kb = derive_session_keys(combine_secrets(SecretBundle(ecdh_b, kem_b)), _BENCH_TRANSCRIPT)
    if ka != kb:
        raise BenchError(f"{suite.label}: peers derived different keys")
    return ka.enc_key


def time_suite(suite: HybridSuite, iterations: int, warmup: int, clock: Callable[[], int] = time.perf_counter_ns) -> list[int]:
    for _ in range(warmup):
        kex_once(suite)
    samples = []
    for _ in range(iterations):
        try:
            t0 = clock()
            kex_once(suite)
            t1 = clock()
        except BenchError:
            raise
        except (OSError, OverflowError) as exc:
            raise BenchError(f"clock failure: {exc}") from exc
        if t1 < t0:
            raise BenchError("clock went backwards")
        samples.append(t1 - t0)
    return samples


def run_bench(cfg: BenchConfig) -> list[BenchRow]:
    rows = []
    for suite in cfg.selected():
        samples = time_suite(suite, cfg.iterations, cfg.warmup, cfg.clock)
        total, packets, verified = suite_accounting(suite, cfg.mtu)
        rows.append(
            BenchRow(
                label=suite.label,
                timing=compute_stats(samples),
                bytes_transfer=total,
                packets=packets,
                strength_pqc=suite.strength_pqc_bits,
                strength_classical=suite.strength_classical_bits,
                verified_accounting=verified,
            )
        )
    return rows


def render_report(rows: Sequence[BenchRow], format: str = "table") -> str:
    if not rows:
        raise BenchError("no rows to render")
    if format == "json":
        return json.dumps([r.to_json() for r in rows], indent=2) + "\n"
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            t = r.timing
            w.writerow([r.label, f"{t.average_ns:.2f}", f"{t.std_dev_ns:.2f}", t.max_ns, t.min_ns,
                        r.bytes_transfer, r.packets, r.strength_pqc, r.strength_classical,
                        str(r.verified_accounting).lower()])
        return buf.getvalue()
    if format == "table":
        header = ["Function", "Average (ns)", "Std Dev (ns)", "Max (ns)", "Min (ns)", "Bytes",
                  "Packets", "PQC bits", "Classical bits", "Verified"]
        body = [
            [r.label, f"{r.timing.average_ns:.2f}", f"{r.timing.std_dev_ns:.2f}", str(r.timing.max_ns),
             str(r.timing.min_ns), str(r.bytes_transfer), str(r.packets), str(r.strength_pqc),
             str(r.strength_classical), "yes" if r.verified_accounting else "no (copied)"]
            for r in rows
        ]
        widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]
        fmt = lambda line: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(line, widths)))  # noqa: E731
        sep = "-" * len(fmt(header))
        return "\n".join([fmt(header), sep, *map(fmt, body)]) + "\n"
    raise BenchError(f"unknown format {format!r}; expected one of {FORMATS}")
