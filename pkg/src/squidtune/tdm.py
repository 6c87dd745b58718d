"""Time-division-multiplexed pulse fabric: a binary tree of SPDT switches.

One room-temperature pulse line enters the root of a complete binary tree;
the address bits set every switch on the path (bit 0 at the root, "0" means
the left throw), so a code selects exactly one leaf.  Leaves are numbered
left to right and the first ``n_channels`` are wired to rf-SQUIDs, qubits
first and couplers after.  The cable count is one line per address bit
plus the pulse line itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidParameterError

QUBIT = "qubit"
COUPLER = "coupler"
UNUSED = "unused"


def tree_depth(n_channels: int) -> int:
    """ceil(log2 n) computed exactly on integers."""
    if n_channels < 1:
        raise InvalidParameterError(f"need at least one channel, got {n_channels}")
    return (n_channels - 1).bit_length()


def cable_count(n_qubits: int, n_couplers: int | None = None) -> tuple[int, int]:
    """(classical, tdm) room-temperature cable counts.

    Classical wiring uses one line per rf-SQUID; the fabric needs
    ceil(log2 channels) address lines plus one pulse line.
    """
    if n_qubits < 1:
        raise InvalidParameterError(f"need at least one qubit, got {n_qubits}")
    couplers = 2 * n_qubits if n_couplers is None else n_couplers
    if couplers < 0:
        raise InvalidParameterError(f"coupler count must be non-negative, got {couplers}")
    channels = n_qubits + couplers
    return channels, tree_depth(channels) + 1


@dataclass(frozen=True)
class Fabric:
    n_qubits: int
    n_couplers: int
    depth: int = field(init=False)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_couplers < 0:
            raise InvalidParameterError("fabric needs >= 1 qubit and >= 0 couplers")
        object.__setattr__(self, "depth", tree_depth(self.n_channels))

    @property
    def n_channels(self) -> int:
        return self.n_qubits + self.n_couplers

    @property
    def n_leaves(self) -> int:
        return 1 << self.depth

    @property
    def n_unused(self) -> int:
        return self.n_leaves - self.n_channels

    @property
    def n_switches(self) -> int:
        return self.n_leaves - 1

    @property
    def cables(self) -> int:
        return self.depth + 1

    def kind(self, channel: int) -> str:
        if 0 <= channel < self.n_qubits:
            return QUBIT
        if self.n_qubits <= channel < self.n_channels:
            return COUPLER
        return UNUSED


def build_fabric(n_qubits: int, n_couplers: int | None = None) -> Fabric:
    return Fabric(n_qubits, 2 * n_qubits if n_couplers is None else n_couplers)


def _check_code(fabric: Fabric, code: str) -> str:
    if not isinstance(code, str) or len(code) != fabric.depth or set(code) - {"0", "1"}:
        raise InvalidParameterError(f"address code must be {fabric.depth} binary digits, got {code!r}")
    return code


def encode(fabric: Fabric, channel: int) -> str:
    if not 0 <= channel < fabric.n_channels:
        raise InvalidParameterError(f"channel {channel} outside 0..{fabric.n_channels - 1}")
    return format(channel, f"0{fabric.depth}b") if fabric.depth else ""


def decode(fabric: Fabric, code: str) -> int | None:
    """Channel addressed by ``code``, or None for an unused leaf."""
    leaf = int(_check_code(fabric, code), 2) if fabric.depth else 0
    return leaf if leaf < fabric.n_channels else None


@dataclass(frozen=True)
class TruthRow:
    code: str
    channel: int | None
    kind: str


def truth_table(fabric: Fabric) -> list[TruthRow]:
    """Every leaf code; unused codes carry ``channel=None`` and kind "unused"."""
    rows = []
    for leaf in range(fabric.n_leaves):
        code = format(leaf, f"0{fabric.depth}b") if fabric.depth else ""
        channel = leaf if leaf < fabric.n_channels else None
        rows.append(TruthRow(code, channel, fabric.kind(leaf)))
    return rows


@dataclass(frozen=True)
class Delivery:
    code: str
    channels: tuple[int, ...]  # channels that received the pulse
    amplitude: float

    @property
    def delivered(self) -> bool:
        return len(self.channels) > 0


def _switch_states(code: str) -> dict[int, int]:
    """Throw (0 left, 1 right) of each switch on the addressed path, keyed by heap index."""
    states, node = {}, 0
    for bit in code:
        states[node] = int(bit)
        node = 2 * node + 1 + int(bit)
    return states


def route(fabric: Fabric, code: str, pulse=None) -> Delivery:
    """Propagate a pulse from the root through the switch tree.

    Switches off the addressed path are left open, so the signal follows
    only the configured throws.  A leaf beyond the last wired channel is a
    dead end and nothing is delivered.
    """
    _check_code(fabric, code)
    states = _switch_states(code)
    first_leaf = fabric.n_leaves - 1  # heap index of leaf 0
    frontier, reached = [0], []
    while frontier:
        node = frontier.pop()
        if node >= first_leaf:
            reached.append(node - first_leaf)
        elif node in states:
            frontier.append(2 * node + 1 + states[node])
    channels = tuple(sorted(c for c in reached if c < fabric.n_channels))
    amplitude = float(getattr(pulse, "amplitude", 0.0 if pulse is None else pulse))
    return Delivery(code, channels, amplitude)


@dataclass
class CampaignReport:
    n_channels: int
    n_codes: int
    deliveries: list[int]  # per channel
    misroutes: int
    cables: int

    @property
    def all_once(self) -> bool:
        return self.misroutes == 0 and all(d == 1 for d in self.deliveries)

    def to_record(self) -> dict:
        return {
            "n_channels": self.n_channels,
            "n_codes": self.n_codes,
            "cables": self.cables,
            "delivered_once": sum(1 for d in self.deliveries if d == 1),
            "never_delivered": sum(1 for d in self.deliveries if d == 0),
            "multiply_delivered": sum(1 for d in self.deliveries if d > 1),
            "misroutes": self.misroutes,
            "all_once": self.all_once,
        }


def campaign(fabric: Fabric, pulse=None) -> CampaignReport:
    """Address every wired channel once, in order, and tally deliveries."""
    counts = [0] * fabric.n_channels
    misroutes = 0
    for ch in range(fabric.n_channels):
        d = route(fabric, encode(fabric, ch), pulse)
        for c in d.channels:
            counts[c] += 1
        misroutes += d.channels != (ch,)
    return CampaignReport(fabric.n_channels, fabric.n_channels, counts, misroutes, fabric.cables)


def cable_rows(n_values, coupler_factor: int = 2):
    rows = []
    for n in n_values:
        classical, tdm = cable_count(n, coupler_factor * n)
        rows.append((n, coupler_factor * n, classical, tdm, classical / tdm))
    return rows

