"""Multi-tier supply network fixtures and their Ising encodings.

The canonical 40-node network has four tiers (2 raw-material sources,
7 suppliers, 11 distributors, 20 stores) joined by 57 directed edges that
cross adjacent tiers only. Edge topology is fixed by a coprime-stride
enumeration so every run (and every implementation of the same recipe)
builds the identical graph; coupling strengths come from the splitmix64
stream, so the fixture is reproducible bit for bit from its seed.

Encoding: stable/stressed node states map to qubit |0>/|1>; the network
Hamiltonian is  sum_i h_i Z_i - sum_(i,j) J_ij Z_i Z_j - sum_k lambda_k X_k
with tier-dependent biases h_i, couplings J_ij in (0.3, 0.8), and
transverse shock fields lambda_k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .pauli import PauliSum, PauliTerm
from .rng import SplitMix64

#: tier layout of the canonical fixture: (first index, count, bias, name prefix)
TIERS = (
    (0, 2, 0.10),
    (2, 7, 0.15),
    (9, 11, 0.20),
    (20, 20, 0.25),
)

NODE_COUNT = 40

#: scenario shock fields: A = embargo at the first raw-material source,
#: B = the same plus a broad demand shock on every store
SHOCK_PRIMARY = 1.5
SHOCK_RETAIL = 0.4


@dataclass(frozen=True)
class SupplyNode:
    index: int
    name: str
    tier: int
    bias: float


@dataclass(frozen=True)
class SupplyEdge:
    src: int
    dst: int
    coupling: float


@dataclass
class SupplyNetwork:
    nodes: list[SupplyNode]
    edges: list[SupplyEdge]
    shocks: dict[int, float] = field(default_factory=dict)

    @property
    def qubit_count(self) -> int:
        return len(self.nodes)

    def node_names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def tier_members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for n in self.nodes:
            out.setdefault(n.tier, []).append(n.index)
        return out

    def mean_coupling(self) -> float:
        if not self.edges:
            return 0.0
        return sum(e.coupling for e in self.edges) / len(self.edges)


@dataclass(frozen=True)
class PolicySpec:
    """A named Hermitian perturbation applied on top of the base Hamiltonian."""

    name: str
    perturbation: PauliSum

    def __post_init__(self):
        if not self.perturbation.is_hermitian:
            raise ValueError(f"policy {self.name!r} perturbation is not Hermitian")


def _node_name(index: int) -> str:
    if index < 2:
        return f"RM-{chr(ord('A') + index)}"
    if index < 9:
        return f"Sup-{chr(ord('A') + index - 2)}"
    if index < 20:
        return f"Dist-{index - 8:02d}"
    return f"Store-{index - 19:02d}"


def canonical_edge_list() -> list[tuple[int, int]]:
    """Fixed edge enumeration: 14 + 21 + 22 edges across tier boundaries."""
    edges: list[tuple[int, int]] = []
    for s in range(2, 9):
        edges.append((0, s))
        edges.append((1, s))
    for k in range(21):
        edges.append((2 + k % 7, 9 + k % 11))
    for k in range(22):
        edges.append((9 + k % 11, 20 + k % 20))
    return edges


def generate_fixture(seed: int = 42) -> SupplyNetwork:
    """Deterministic 40-node, 57-edge network; couplings 0.3 + 0.5 u from splitmix64.

    Draws are consumed in canonical edge-enumeration order, so the coupling
    list is a pure function of the seed. No shocks are attached.
    """
    nodes = []
    for start, count, bias in TIERS:
        tier = TIERS.index((start, count, bias))
        for i in range(start, start + count):
            nodes.append(SupplyNode(i, _node_name(i), tier, bias))
    rng = SplitMix64(seed)
    edges = [
        SupplyEdge(src, dst, 0.3 + 0.5 * rng.next_double())
        for src, dst in canonical_edge_list()
    ]
    return SupplyNetwork(nodes=nodes, edges=edges, shocks={})


def apply_scenario(net: SupplyNetwork, scenario: str) -> SupplyNetwork:
    """Return a copy with the scenario's shock fields attached.

    Scenario "A" places a single strong shock on qubit 0; "B" additionally
    shocks every store tier node; "none" clears all shocks. Idempotent.
    """
    if net.qubit_count != NODE_COUNT:
        raise ValueError("scenarios are defined on the full 40-node network")
    if scenario == "none":
        shocks: dict[int, float] = {}
    elif scenario == "A":
        shocks = {0: SHOCK_PRIMARY}
    elif scenario == "B":
        shocks = {0: SHOCK_PRIMARY}
        shocks.update({k: SHOCK_RETAIL for k in range(20, 40)})
    else:
        raise ValueError(f"unknown scenario {scenario!r} (expected A, B or none)")
    return SupplyNetwork(nodes=list(net.nodes), edges=list(net.edges), shocks=shocks)


def build_hamiltonian(net: SupplyNetwork) -> PauliSum:
    """Ising Hamiltonian of the network, one term per node/edge/shock."""
    terms = [PauliTerm(n.bias, {n.index: "Z"}) for n in net.nodes]
    terms += [
        PauliTerm(-e.coupling, {e.src: "Z", e.dst: "Z"}) for e in net.edges
    ]
    terms += [
        PauliTerm(-lam, {k: "X"}) for k, lam in sorted(net.shocks.items())
    ]
    return PauliSum(terms)


def hamiltonian_parts(net: SupplyNetwork) -> list[PauliSum]:
    """Split into mutually-commuting groups: local Z, coupling ZZ, shock X.

    Empty groups are dropped; the order matches the product-formula
    convention used by the Trotter evolution.
    """
    local = PauliSum(PauliTerm(n.bias, {n.index: "Z"}) for n in net.nodes)
    coupling = PauliSum(
        PauliTerm(-e.coupling, {e.src: "Z", e.dst: "Z"}) for e in net.edges
    )
    shock = PauliSum(
        PauliTerm(-lam, {k: "X"}) for k, lam in sorted(net.shocks.items())
    )
    return [p for p in (local, coupling, shock) if not p.is_zero()]


def subnetwork(net: SupplyNetwork, qubit_count: int) -> SupplyNetwork:
    """Induced subgraph on qubit indices 0..qubit_count-1, indices unchanged."""
    if not 1 <= qubit_count <= net.qubit_count:
        raise ValueError(
            f"subnetwork size {qubit_count} out of range 1..{net.qubit_count}"
        )
    return SupplyNetwork(
        nodes=[n for n in net.nodes if n.index < qubit_count],
        edges=[e for e in net.edges if e.src < qubit_count and e.dst < qubit_count],
        shocks={k: v for k, v in net.shocks.items() if k < qubit_count},
    )


# ---------------------------------------------------------------------------
# canonical policy set
# ---------------------------------------------------------------------------

#: supplier-to-distributor alternate routes used by the trade-diversion policy;
#: disjoint from the canonical edge list at seed 42
ALTERNATE_EDGES = ((3, 10), (4, 12), (5, 14), (6, 16), (7, 18))


def canonical_policies(net: SupplyNetwork,
                       diversion_coupling: float = 0.2) -> list[PolicySpec]:
    """The six counterfactual interventions screened by the pipeline.

    Z terms model demand pressure, X terms liquidity injection, ZZ terms
    rerouted couplings. The "combined" policy is the canonical sum of the
    rate-hike, supplier-subsidy and stockpile-release perturbations.
    """
    if net.qubit_count != NODE_COUNT:
        raise ValueError("canonical policies are defined on the 40-node network")
    rate_hike = PauliSum(PauliTerm(0.4, {k: "Z"}) for k in range(9, 20))
    subsidy = PauliSum((
        PauliTerm(-0.6, {2: "X"}),
        PauliTerm(-0.6, {3: "X"}),
        PauliTerm(-0.4, {4: "X"}),
    ))
    stockpile = PauliSum(PauliTerm(0.5, {k: "Z"}) for k in (5, 6, 7))
    diversion = PauliSum(
        PauliTerm(diversion_coupling, {a: "Z", b: "Z"}) for a, b in ALTERNATE_EDGES
    )
    return [
        PolicySpec("none", PauliSum.zero()),
        PolicySpec("rate-hike", rate_hike),
        PolicySpec("supplier-subsidy", subsidy),
        PolicySpec("stockpile-release", stockpile),
        PolicySpec("trade-diversion", diversion),
        PolicySpec("combined", rate_hike + subsidy + stockpile),
    ]


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def network_to_json(net: SupplyNetwork) -> str:
    """Canonical JSON form; couplings carry 17 significant digits."""
    payload = {
        "nodes": [
            {"index": n.index, "name": n.name, "tier": n.tier, "bias": n.bias}
            for n in net.nodes
        ],
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "coupling": float(format(e.coupling, ".17g")),
            }
            for e in net.edges
        ],
        "shocks": {str(k): v for k, v in sorted(net.shocks.items())},
    }
    return json.dumps(payload, indent=2)


def network_from_json(text: str) -> SupplyNetwork:
    payload = json.loads(text)
    nodes = [
        SupplyNode(d["index"], d["name"], d["tier"], d["bias"])
        for d in payload["nodes"]
    ]
    edges = [
        SupplyEdge(d["src"], d["dst"], d["coupling"]) for d in payload["edges"]
    ]
    shocks = {int(k): float(v) for k, v in payload.get("shocks", {}).items()}
    return SupplyNetwork(nodes=nodes, edges=edges, shocks=shocks)


def save_network(net: SupplyNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(network_to_json(net))
        fh.write("\n")


def load_network(path) -> SupplyNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        return network_from_json(fh.read())


def policies_to_text(policies: list[PolicySpec]) -> str:
    """Policy file: one [name] section per policy, operator lines inside."""
    from .pauli import to_text

    blocks = []
    for p in policies:
        body = to_text(p.perturbation)
        blocks.append(f"[{p.name}]" + ("\n" + body if body else ""))
    return "\n\n".join(blocks) + "\n"


def policies_from_text(text: str) -> list[PolicySpec]:
    from .pauli import from_text

    policies: list[PolicySpec] = []
    name: str | None = None
    lines: list[str] = []

    def flush():
        if name is not None:
            policies.append(PolicySpec(name, from_text("\n".join(lines))))

    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            flush()
            name = line[1:-1].strip()
            lines = []
        elif line:
            lines.append(line)
    flush()
    return policies
