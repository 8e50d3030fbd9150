"""Cellular automata on timing networks, synchronous and asynchronous.

Synchronous semantics: every cell applies its local rule to the previous
global state, s(k+1) = F(s(k)).  Because the update map is a function on a
finite state set, every orbit is eventually periodic and the full state
transition graph is a functional digraph whose circuits are the attractors.

Asynchronous semantics: cell i performs its (k+1)-th update at the time
x_i(k+1) given by the max-plus timing recurrence, waiting for the states
its neighbours computed in cycle k to arrive.  Every cell therefore uses
neighbour values from exactly the previous cycle, so the state attached to
the k-th contour x(k) equals the synchronous state s(k) even though wall
clock update times are scattered.  verify_bijection re-derives the
asynchronous states with an explicit per-message event simulation (no
matrix algebra) and compares; an optional early-update fault breaks the
wait-for-all discipline in one cell to show the equality is not vacuous.

Between updates a cell holds its last computed state in memory: s_i(k) is
exposed on the half-open interval [x_i(k), x_i(k+1)).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .errors import NetworkError, RuleError, StateUndefinedError
from .network import NetworkSpec, TimingParameters, build_p, validate_timing
from .semiring import MaxPlusMatrix, Scalar
from .trajectory import Trajectory, iterate

State = tuple  # tuple of 0/1 ints, cell 0 first


def state_from_string(text: str) -> State:
    if not text or any(c not in "01" for c in text):
        raise RuleError(f"state string must be non-empty over 0/1, got {text!r}")
    return tuple(int(c) for c in text)


def state_to_string(state: State) -> str:
    return "".join(str(b) for b in state)


@dataclass(frozen=True)
class CARule:
    """Local update rule.

    kind "eca": classical elementary CA table rule.  The new state is the
    binary digit of the rule number selected by the three neighbourhood
    bits (left, self, right) read as an integer 4l + 2c + r.  Only valid
    on networks where every neighbourhood is {i-1, i, i+1} mod N.

    kind "parity": sum of the predecessor states mod 2.  Valid on any
    topology and any in-degree; on a 3-ring it coincides with rule 150.
    """

    kind: str
    number: int | None = None

    @classmethod
    def eca(cls, number: int) -> "CARule":
        if not (0 <= number <= 255):
            raise RuleError(f"ECA rule number must be in 0..255, got {number}")
        return cls("eca", number)

    @classmethod
    def parity(cls) -> "CARule":
        return cls("parity")

    def apply(self, neighbour_states: Sequence[int]) -> int:
        if self.kind == "eca":
            if len(neighbour_states) != 3:
                raise RuleError(
                    f"ECA rule needs exactly 3 neighbour states, got "
                    f"{len(neighbour_states)}"
                )
            left, centre, right = neighbour_states
            return (self.number >> (4 * left + 2 * centre + right)) & 1
        if self.kind == "parity":
            return sum(neighbour_states) & 1
        raise RuleError(f"unknown rule kind {self.kind!r}")

    def describe(self) -> str:
        return f"eca{self.number}" if self.kind == "eca" else "parity"


def _check_rule_fits(rule: CARule, spec: NetworkSpec) -> None:
    if rule.kind == "eca" and not spec.is_three_ring():
        raise RuleError(
            "ECA table rules need the nearest-neighbour ring "
            "(every neighbourhood exactly {i-1, i, i+1}); "
            "use the parity rule on general topologies"
        )


def sync_step(rule: CARule, spec: NetworkSpec, state: State) -> State:
    """One synchronous update of the whole configuration."""
    if len(state) != spec.size:
        raise RuleError(f"state has {len(state)} cells, network has {spec.size}")
    _check_rule_fits(rule, spec)
    return tuple(
        rule.apply(tuple(state[j] for j in spec.predecessors(i)))
        for i in range(spec.size)
    )


@dataclass(frozen=True)
class SyncOrbit:
    """Orbit of one start state: states s(0..entry+period-1), where the
    tail states before ``entry`` are transient and the final ``period``
    states repeat forever."""

    states: tuple
    entry_time: int
    period: int

    def periodic_states(self) -> tuple:
        return self.states[self.entry_time : self.entry_time + self.period]

    def state(self, k: int) -> State:
        """s(k) for any k >= 0, folding into the periodic part."""
        if k < len(self.states):
            return self.states[k]
        off = (k - self.entry_time) % self.period
        return self.states[self.entry_time + off]


def sync_orbit(rule: CARule, spec: NetworkSpec, s0: State, k_max: int) -> SyncOrbit:
    """Iterate until the first repeated configuration.

    The first repeat of a deterministic map happens at (entry, entry +
    period) exactly, so it pins both numbers.  k_max bounds the number of
    steps; 2^N always suffices.
    """
    _check_rule_fits(rule, spec)
    if len(s0) != spec.size:
        raise RuleError(f"s0 has {len(s0)} cells, network has {spec.size}")
    seen = {s0: 0}
    states = [s0]
    s = s0
    for k in range(1, k_max + 2):
        s = sync_step(rule, spec, s)
        if s in seen:
            entry = seen[s]
            return SyncOrbit(tuple(states), entry, k - entry)
        if k > k_max:
            break
        seen[s] = k
        states.append(s)
    raise RuleError(f"no repeated configuration within k_max = {k_max} steps")


# -- state transition graph --------------------------------------------------

STG_CELL_CAP = 24


def _encode(state: State) -> int:
    """Configuration to integer, first cell most significant, so the code
    equals int(state_to_string(s), 2)."""
    code = 0
    for b in state:
        code = (code << 1) | b
    return code


def _decode(code: int, n: int) -> State:
    return tuple((code >> (n - 1 - i)) & 1 for i in range(n))


@dataclass(frozen=True)
class StateTransitionGraph:
    """Functional digraph on all 2^N configurations.

    successors[c] is the code of the image of configuration c; attractors
    are the circuits, each stored rotated so its smallest code comes
    first, sorted by (period, smallest code).
    """

    size: int
    successors: tuple
    attractors: tuple  # tuple of tuples of codes
    on_attractor: tuple  # bool per code

    def decode(self, code: int) -> State:
        return _decode(code, self.size)

    def transient_count(self) -> int:
        return sum(1 for b in self.on_attractor if not b)


def build_stg(rule: CARule, spec: NetworkSpec, cell_cap: int = STG_CELL_CAP):
    """Exhaustive state transition graph; refuses more than cell_cap cells
    (2^N states) to keep memory bounded."""
    _check_rule_fits(rule, spec)
    n = spec.size
    if n > cell_cap:
        raise NetworkError(
            f"state transition graph over {n} cells needs 2^{n} states; "
            f"cap is {cell_cap} cells (trace single orbits instead)"
        )
    total = 1 << n
    nbhd = [spec.predecessors(i) for i in range(n)]
    succ = []
    for code in range(total):
        s = _decode(code, n)
        nxt = tuple(rule.apply(tuple(s[j] for j in nbhd[i])) for i in range(n))
        succ.append(_encode(nxt))

    on_attr = [False] * total
    resolved = [False] * total
    attractors = []
    for start in range(total):
        if resolved[start]:
            continue
        walk = []
        pos: dict = {}
        s = start
        while True:
            if resolved[s]:
                break
            if s in pos:
                cycle = walk[pos[s] :]
                low = cycle.index(min(cycle))
                cycle = cycle[low:] + cycle[:low]
                attractors.append(tuple(cycle))
                for c in cycle:
                    on_attr[c] = True
                break
            pos[s] = len(walk)
            walk.append(s)
            s = succ[s]
        for v in walk:
            resolved[v] = True
    attractors.sort(key=lambda cyc: (len(cyc), cyc[0]))
    return StateTransitionGraph(n, tuple(succ), tuple(attractors), tuple(on_attr))


def attractor_census(stg: StateTransitionGraph) -> dict:
    """JSON-ready census: fixed points as strings, longer cycles with
    period and state list."""
    fixed = []
    cycles = []
    for cyc in stg.attractors:
        if len(cyc) == 1:
            fixed.append(state_to_string(stg.decode(cyc[0])))
        else:
            cycles.append(
                {
                    "period": len(cyc),
                    "states": [state_to_string(stg.decode(c)) for c in cyc],
                }
            )
    return {"fixed_points": fixed, "cycles": cycles}


# -- asynchronous runs ---------------------------------------------------------


@dataclass(frozen=True)
class AsyncRun:
    """Joint record of update times and contour states.

    trajectory.states[k] are the k-th update times x(k); states[k] is the
    configuration computed at that contour.  Cell i holds states[k][i] in
    memory over [x_i(k), x_i(k+1)).
    """

    rule: CARule
    spec: NetworkSpec
    params: TimingParameters
    trajectory: Trajectory
    states: tuple

    @property
    def k_max(self) -> int:
        return self.trajectory.k_max

    def update_times(self, i: int) -> tuple:
        return tuple(x[i] for x in self.trajectory.states)

    def hold_intervals(self, i: int) -> tuple:
        """(start, end, bit) triples for cell i, k = 0..k_max-1.  They tile
        [x_i(0), x_i(k_max)) with no gap or overlap."""
        times = self.update_times(i)
        return tuple(
            (times[k], times[k + 1], self.states[k][i])
            for k in range(self.k_max)
        )

    def time_window(self) -> tuple:
        """(first, last): full-state queries are defined on [first, last]."""
        first = max(x[0] for x in (self.update_times(i) for i in range(self.spec.size)))
        last = min(
            self.update_times(i)[self.k_max] for i in range(self.spec.size)
        )
        return first, last


def async_run(
    rule: CARule,
    spec: NetworkSpec,
    params: TimingParameters,
    s0: State,
    x0: Sequence[Scalar],
    k_max: int,
) -> AsyncRun:
    """Timed run: max-plus trajectory for the update times, synchronous
    map for the contour states (the two agree cycle for cycle; see
    verify_bijection for the independent check)."""
    _check_rule_fits(rule, spec)
    if len(s0) != spec.size:
        raise RuleError(f"s0 has {len(s0)} cells, network has {spec.size}")
    P = build_p(spec, params).matrix
    traj = iterate(P, x0, k_max)
    for i in range(spec.size):
        times = [x[i] for x in traj.states]
        for k in range(k_max):
            if not times[k] < times[k + 1]:
                raise NetworkError(
                    f"update times of cell {i + 1} are not strictly increasing "
                    f"at cycle {k}; memory semantics need a self-loop on every "
                    "cell (tau_ii present) and positive xi"
                )
    states = [tuple(s0)]
    for _ in range(k_max):
        states.append(sync_step(rule, spec, states[-1]))
    return AsyncRun(rule, spec, params, traj, tuple(states))


def state_at(run: AsyncRun, t: Scalar) -> State:
    """Configuration held in memory at wall-clock time t.

    Defined from the first full contour, max_i x_i(0), through the last
    time every cell's current hold interval is still known,
    min_i x_i(k_max).  Intervals are closed on the left: at t = x_i(k)
    the fresh state s_i(k) is already visible.
    """
    first, last = run.time_window()
    if t < first:
        raise StateUndefinedError(
            f"state undefined before the initial contour (t = {t!r} < {first!r})"
        )
    if t > last:
        raise StateUndefinedError(
            f"state undefined beyond the computed contours (t = {t!r} > {last!r})"
        )
    bits = []
    for i in range(run.spec.size):
        times = run.update_times(i)
        k = bisect_right(times, t) - 1
        bits.append(run.states[k][i])
    return tuple(bits)


# -- event-level verification --------------------------------------------------


def event_simulation(
    rule: CARule,
    spec: NetworkSpec,
    params: TimingParameters,
    s0: State,
    x0: Sequence[Scalar],
    k_max: int,
    early_update_cell: int | None = None,
):
    """Message-passing simulation of the asynchronous network.

    Each cycle, every cell waits for the state messages its neighbours
    sent after their previous update (arrival = send time + tau), then
    spends xi processing.  No max-plus matrix is involved: times and
    states are derived purely from per-arc message bookkeeping, which is
    what makes this an independent oracle for the contour semantics.

    With early_update_cell set, that cell fires as soon as its first
    message of the cycle arrives and uses the last value it ever received
    from each not-yet-arrived neighbour (initially its neighbours' start
    states).  This deliberately breaks the wait-for-all discipline.

    Returns (times, states): lists of length k_max + 1.
    """
    _check_rule_fits(rule, spec)
    validate_timing(spec, params)
    if len(s0) != spec.size or len(x0) != spec.size:
        raise RuleError("s0 and x0 must have one entry per cell")
    if early_update_cell is not None and not (0 <= early_update_cell < spec.size):
        raise RuleError(f"no cell {early_update_cell!r} to inject the fault into")
    n = spec.size
    tau = params.tau
    nbhd = [spec.predecessors(i) for i in range(n)]
    for i in range(n):
        if not nbhd[i]:
            raise NetworkError(
                f"cell {i + 1} has no predecessors; every cell must read someone"
            )
    times = [tuple(x0)]
    states = [tuple(s0)]
    # Last value each cell received from each neighbour (fault path only).
    known = {
        (i, j): s0[j] for i in range(n) for j in nbhd[i]
    }
    for _ in range(k_max):
        prev_t, prev_s = times[-1], states[-1]
        new_t = []
        new_s = []
        for i in range(n):
            arrivals = [(prev_t[j] + tau[(i, j)], j) for j in nbhd[i]]
            if i == early_update_cell:
                receive = min(a for (a, _j) in arrivals)
                inputs = []
                for (a, j) in arrivals:
                    if a <= receive:
                        known[(i, j)] = prev_s[j]
                    inputs.append(known[(i, j)])
            else:
                receive = max(a for (a, _j) in arrivals)
                for (_a, j) in arrivals:
                    known[(i, j)] = prev_s[j]
                inputs = [prev_s[j] for j in nbhd[i]]
            new_t.append(receive + params.xi[i])
            new_s.append(rule.apply(tuple(inputs)))
        times.append(tuple(new_t))
        states.append(tuple(new_s))
    return times, states


def verify_bijection(
    rule: CARule,
    spec: NetworkSpec,
    params: TimingParameters,
    s0: State,
    x0: Sequence[Scalar],
    k_max: int,
    early_update_cell: int | None = None,
) -> bool:
    """True iff the event-level states match the synchronous map at every
    cycle k <= k_max.  With a fault injected the comparison is expected to
    fail; a False result then certifies the check has teeth."""
    _, event_states = event_simulation(
        rule, spec, params, s0, x0, k_max, early_update_cell
    )
    s = tuple(s0)
    for k in range(k_max + 1):
        if event_states[k] != s:
            return False
        if k < k_max:
            s = sync_step(rule, spec, s)
    return True
