"""Round engine, sifting rules, key extraction and transcript files.

One protocol round: the sender draws a signal label, the receiver draws a
phase setting phi in {0, pi/2} and a spin basis, the particle propagates
through the interferometer (optionally via an adversary's tap), and the
joint (port, spin) outcome is sampled.  A round is kept when the receiver
setting is the matched one for the announced group -- in that case the
outcome identifies the sent state within the group and both sides decode
the same key bit.  Every other setting leaves the outcome uniformly
random and the round is aborted; aborted rounds have their labels
declared publicly and feed the security analysis.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Callable, IO, Iterable

import numpy as np

from .errors import ConfigError, DecodingError, InvalidDistributionError, ParseError
from .optics import (
    OUTCOMES,
    Group,
    OutcomePair,
    Port,
    SpinBasis,
    SpinOutcome,
    StateLabel,
    bob_transform,
    hadamard_stage,
    measure_distribution,
    outcome_support,
    prepare,
)
from .qmath import Rng

TRANSCRIPT_VERSION = 1
_HALF = (0.5, 0.5)


class PhaseChoice(Enum):
    """Receiver phase setting; the protocol uses exactly two values."""

    PHI_0 = "0"
    PHI_HALF_PI = "pi/2"

    @property
    def radians(self) -> float:
        return 0.0 if self is PhaseChoice.PHI_0 else math.pi / 2.0


class Verdict(Enum):
    KEEP = "keep"
    ABORT = "abort"


class BasisMode(Enum):
    """How the receiver picks the spin basis each round."""

    INDEPENDENT_UNIFORM = "independent_uniform"
    ALWAYS_Z = "always_z"


#: The unique group whose states are deterministically resolved by each
#: receiver setting.  Rounds are kept exactly when the sent group matches.
KEEP_GROUP: dict[tuple[PhaseChoice, SpinBasis], Group] = {
    (PhaseChoice.PHI_0, SpinBasis.Y): Group.G1,
    (PhaseChoice.PHI_HALF_PI, SpinBasis.Z): Group.G1,
    (PhaseChoice.PHI_0, SpinBasis.Z): Group.G2,
    (PhaseChoice.PHI_HALF_PI, SpinBasis.Y): Group.G2,
}


def keep_group(phi: PhaseChoice, basis: SpinBasis) -> Group:
    """Group for which (phi, basis) is the matched (key-generating) setting."""
    return KEEP_GROUP[(phi, basis)]


def sift(group: Group, phi: PhaseChoice, basis: SpinBasis) -> Verdict:
    """Keep/abort decision; depends only on the setting, never the outcome."""
    return Verdict.KEEP if KEEP_GROUP[(phi, basis)] is group else Verdict.ABORT


def decode_bit(group: Group, phi: PhaseChoice, basis: SpinBasis, outcome: OutcomePair) -> int:
    """Receiver-side key bit of a kept round.

    The matched setting splits the four outcomes into two disjoint pairs,
    one per group member; the bit is the member whose support contains
    the observed outcome.
    """
    if sift(group, phi, basis) is not Verdict.KEEP:
        raise DecodingError(f"({phi.value}, {basis.value}) is not a kept setting for {group.value}")
    for label in group.labels:
        if outcome in outcome_support(label, phi.radians, basis):
            return label.bit
    raise DecodingError(f"outcome {outcome} matches no state of group {group.value}")


@dataclass(frozen=True)
class AlicePolicy:
    """Sender's source distribution over the four signal labels."""

    weights: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        if len(w) != 4:
            raise InvalidDistributionError(f"expected 4 weights, got {len(w)}")
        if any(x < 0.0 for x in w):
            raise InvalidDistributionError(f"negative weight in {w}")
        if abs(sum(w) - 1.0) > 1e-9:
            raise InvalidDistributionError(f"weights sum to {sum(w)!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls) -> "AlicePolicy":
        return cls((0.25, 0.25, 0.25, 0.25))

    @classmethod
    def family(cls, p: float) -> "AlicePolicy":
        """One-parameter family: weight p on the first label, rest uniform."""
        if not 0.0 <= p <= 1.0:
            raise InvalidDistributionError(f"family parameter must lie in [0, 1], got {p!r}")
        q = (1.0 - p) / 3.0
        return cls((p, q, q, q))


@dataclass(frozen=True)
class BobPolicy:
    """Receiver's setting strategy.  phi is always drawn uniformly."""

    basis_mode: BasisMode = BasisMode.INDEPENDENT_UNIFORM


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    label: StateLabel
    phi: PhaseChoice
    basis: SpinBasis
    outcome: OutcomePair
    verdict: Verdict
    alice_bit: int
    bob_bit: int | None
    decode_failed: bool = False


@lru_cache(maxsize=None)
def _cached_distribution(state_bytes: bytes, phi: float, basis: SpinBasis) -> tuple[float, ...]:
    # memo of the full receiver pipeline keyed by the exact input state
    state = np.frombuffer(state_bytes, dtype=complex)
    out = hadamard_stage(bob_transform(state, phi), phi)
    return tuple(float(p) for p in measure_distribution(out, basis))


def receiver_distribution(state: np.ndarray, phi: float, basis: SpinBasis) -> tuple[float, ...]:
    """Outcome distribution of the full receiver chain on an arbitrary state."""
    return _cached_distribution(np.asarray(state, dtype=complex).tobytes(), float(phi), basis)


def run_round(index: int, alice: AlicePolicy, bob: BobPolicy, eve, rng: Rng) -> RoundRecord:
    """Simulate one round.

    ``eve`` is None or an adversary object exposing
    ``tap(state, rng) -> (state, rng)``.  Draw order within the round's
    stream: label, phi, basis (uniform mode only), adversary draws,
    outcome.
    """
    label_idx, rng = rng.sample(alice.weights)
    label = tuple(StateLabel)[label_idx]

    phi_idx, rng = rng.sample(_HALF)
    phi = PhaseChoice.PHI_0 if phi_idx == 0 else PhaseChoice.PHI_HALF_PI
    if bob.basis_mode is BasisMode.ALWAYS_Z:
        basis = SpinBasis.Z
    else:
        basis_idx, rng = rng.sample(_HALF)
        basis = SpinBasis.Z if basis_idx == 0 else SpinBasis.Y

    state = prepare(label)
    if eve is not None:
        state, rng = eve.tap(state, rng)

    dist = _cached_distribution(state.tobytes(), phi.radians, basis)
    outcome_idx, rng = rng.sample(dist)
    outcome = OUTCOMES[outcome_idx]

    verdict = sift(label.group, phi, basis)
    bob_bit = None
    decode_failed = False
    if verdict is Verdict.KEEP:
        try:
            bob_bit = decode_bit(label.group, phi, basis, outcome)
        except DecodingError:
            decode_failed = True
    return RoundRecord(
        round_index=index,
        label=label,
        phi=phi,
        basis=basis,
        outcome=outcome,
        verdict=verdict,
        alice_bit=label.bit,
        bob_bit=bob_bit,
        decode_failed=decode_failed,
    )


@dataclass
class Transcript:
    """Complete record of a session plus the publicly announced data."""

    seed: int
    config: dict
    rounds: list[RoundRecord]
    declarations: list[tuple[int, StateLabel]]
    alice_key: list[int]
    bob_key: list[int]
    version: int = TRANSCRIPT_VERSION

    def keep_fraction(self) -> float:
        if not self.rounds:
            return 0.0
        kept = sum(r.verdict is Verdict.KEEP for r in self.rounds)
        return kept / len(self.rounds)

    def abort_counts(self) -> dict[StateLabel, int]:
        counts = {label: 0 for label in StateLabel}
        for _, label in self.declarations:
            counts[label] += 1
        return counts

    def decode_failures(self) -> int:
        return sum(r.decode_failed for r in self.rounds)


def _config_snapshot(n_rounds: int, alice: AlicePolicy, bob: BobPolicy, eve) -> dict:
    return {
        "n_rounds": n_rounds,
        "alice_weights": [float(w) for w in alice.weights],
        "basis_mode": bob.basis_mode.value,
        "eve": None if eve is None else eve.to_config(),
    }


def run_session(
    n_rounds: int,
    alice: AlicePolicy,
    bob: BobPolicy,
    eve=None,
    seed: int = 0,
    jobs: int = 1,
) -> Transcript:
    """Run ``n_rounds`` rounds and assemble keys and abort declarations.

    Round ``i`` draws only from stream ``i`` of ``seed``, so the transcript
    is identical whatever ``jobs`` is and however the work is scheduled.
    """
    if n_rounds < 1:
        raise ConfigError(f"n_rounds must be >= 1, got {n_rounds}")
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")

    def one(i: int) -> RoundRecord:
        return run_round(i, alice, bob, eve, Rng(seed=seed, stream=i))

    if jobs == 1:
        rounds = [one(i) for i in range(n_rounds)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rounds = list(pool.map(one, range(n_rounds)))

    declarations = [(r.round_index, r.label) for r in rounds if r.verdict is Verdict.ABORT]
    alice_key = [r.alice_bit for r in rounds if r.verdict is Verdict.KEEP]
    bob_key = [r.bob_bit for r in rounds if r.verdict is Verdict.KEEP and r.bob_bit is not None]
    return Transcript(
        seed=seed,
        config=_config_snapshot(n_rounds, alice, bob, eve),
        rounds=rounds,
        declarations=declarations,
        alice_key=alice_key,
        bob_key=bob_key,
    )


def replay_session(transcript: Transcript, eve_factory: Callable[[dict], object] | None = None) -> Transcript:
    """Re-run a session from a transcript's header configuration."""
    cfg = transcript.config
    eve_cfg = cfg.get("eve")
    eve = None
    if eve_cfg is not None:
        if eve_factory is None:
            raise ConfigError("transcript has an adversary; supply eve_factory")
        eve = eve_factory(eve_cfg)
    return run_session(
        n_rounds=cfg["n_rounds"],
        alice=AlicePolicy(tuple(cfg["alice_weights"])),
        bob=BobPolicy(BasisMode(cfg["basis_mode"])),
        eve=eve,
        seed=transcript.seed,
    )


# ---------------------------------------------------------------------------
# transcript serialization: one JSON object per line, header / rounds / footer


def _round_to_obj(r: RoundRecord) -> dict:
    return {
        "record": "round",
        "round_index": r.round_index,
        "label": r.label.value,
        "phi": r.phi.value,
        "basis": r.basis.value,
        "port": r.outcome.port.value,
        "spin": r.outcome.spin.value,
        "verdict": r.verdict.value,
        "alice_bit": r.alice_bit,
        "bob_bit": r.bob_bit,
        "decode_failed": r.decode_failed,
    }


def _round_from_obj(obj: dict, line: int) -> RoundRecord:
    try:
        return RoundRecord(
            round_index=int(obj["round_index"]),
            label=StateLabel(obj["label"]),
            phi=PhaseChoice(obj["phi"]),
            basis=SpinBasis(obj["basis"]),
            outcome=OutcomePair(Port(obj["port"]), SpinOutcome(obj["spin"])),
            verdict=Verdict(obj["verdict"]),
            alice_bit=int(obj["alice_bit"]),
            bob_bit=None if obj["bob_bit"] is None else int(obj["bob_bit"]),
            decode_failed=bool(obj.get("decode_failed", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad round record ({exc})", line=line) from exc


def _bits_to_str(bits: Iterable[int]) -> str:
    return "".join("1" if b else "0" for b in bits)


def save_transcript(transcript: Transcript, dest: str | Path | IO[str]) -> None:
    """Write a transcript as line-delimited JSON (.qkdlog)."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        header = {
            "record": "header",
            "version": transcript.version,
            "seed": transcript.seed,
            "config": transcript.config,
        }
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for r in transcript.rounds:
            fh.write(json.dumps(_round_to_obj(r), separators=(",", ":")) + "\n")
        footer = {
            "record": "footer",
            "declarations": [[i, label.value] for i, label in transcript.declarations],
            "alice_key": _bits_to_str(transcript.alice_key),
            "bob_key": _bits_to_str(transcript.bob_key),
        }
        fh.write(json.dumps(footer, separators=(",", ":")) + "\n")
    finally:
        if own:
            fh.close()


def load_transcript(src: str | Path | IO[str]) -> Transcript:
    """Parse a .qkdlog file back into a Transcript.

    Raises ParseError (with the 1-based line number) on malformed JSON,
    unknown record kinds, an unsupported version, or truncation.
    """
    own = isinstance(src, (str, Path))
    fh = open(src, "r", encoding="utf-8") if own else src
    try:
        header = None
        rounds: list[RoundRecord] = []
        footer = None
        line_no = 0
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=line_no) from exc
            kind = obj.get("record")
            if line_no == 1:
                if kind != "header":
                    raise ParseError(f"expected header record, got {kind!r}", line=1)
                if obj.get("version") != TRANSCRIPT_VERSION:
                    raise ParseError(
                        f"unsupported transcript version {obj.get('version')!r}", line=1
                    )
                header = obj
            elif kind == "round":
                if footer is not None:
                    raise ParseError("round record after footer", line=line_no)
                rounds.append(_round_from_obj(obj, line_no))
            elif kind == "footer":
                if footer is not None:
                    raise ParseError("duplicate footer record", line=line_no)
                footer = obj
            elif kind == "header":
                raise ParseError("duplicate header record", line=line_no)
            else:
                raise ParseError(f"unknown record kind {kind!r}", line=line_no)
        if header is None:
            raise ParseError("empty transcript, missing header record", line=1)
        if footer is None:
            raise ParseError("transcript ended before footer record", line=line_no + 1)
        expected = header["config"].get("n_rounds")
        if expected != len(rounds):
            raise ParseError(
                f"header announces {expected} rounds, found {len(rounds)}", line=line_no
            )
        try:
            declarations = [(int(i), StateLabel(v)) for i, v in footer["declarations"]]
            alice_key = [int(c) for c in footer["alice_key"]]
            bob_key = [int(c) for c in footer["bob_key"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad footer record ({exc})", line=line_no) from exc
        return Transcript(
            seed=int(header["seed"]),
            config=header["config"],
            rounds=rounds,
            declarations=declarations,
            alice_key=alice_key,
            bob_key=bob_key,
            version=int(header["version"]),
        )
    finally:
        if own:
            fh.close()
