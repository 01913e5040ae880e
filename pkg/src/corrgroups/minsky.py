"""Counter machines with guarded commands.

A machine has k glasses (counters holding arbitrarily many coins) and a
contiguous set of states with 0 the halt state and 1 the start state.  Four
command kinds exist: ``Add`` puts a coin in each listed glass, ``Sub``
removes one from each listed glass when all are nonempty, ``EmptyCheck``
fires when all listed glasses are empty, ``Stop`` fires unconditionally.
An input n is accepted when the run from ``(1; n, 0, ..., 0)`` reaches the
all-zero halt configuration ``(0; 0, ..., 0)``.

Besides simulation this module provides a bounded closure of a configuration
under commands *and their inverses* (the reachability relation is symmetric
there), two machine transformations used to build machines with special
acceptance behaviour — adding a tracking glass, and splicing a length-p
add-cycle onto the start state — and the sequence of primes admitting a
fixed primitive root.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable

__all__ = [
    "Command",
    "MinskyMachine",
    "Configuration",
    "RunResult",
    "NondeterministicMachine",
    "applicable_commands",
    "is_deterministic",
    "run",
    "equivalence_closure",
    "add_glass_extension",
    "p_cycle_extension",
    "is_primitive_root",
    "prime_sequence",
]

ADD = "Add"
SUB = "Sub"
EMPTY_CHECK = "EmptyCheck"
STOP = "Stop"

_KINDS = (ADD, SUB, EMPTY_CHECK, STOP)


class NondeterministicMachine(Exception):
    """Raised when an operation requires a deterministic machine."""


@dataclass(frozen=True)
class Command:
    kind: str
    input_state: int
    output_state: int
    glasses: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown command kind {self.kind!r}")
        if self.input_state == 0:
            raise ValueError("no commands may leave the halt state")
        seen: list[int] = []
        for g in self.glasses:
            if g not in seen:
                seen.append(g)
        object.__setattr__(self, "glasses", tuple(seen))
        if self.kind == STOP:
            if self.glasses:
                raise ValueError("Stop commands take no glasses")
        elif not self.glasses:
            raise ValueError(f"{self.kind} commands need at least one glass")

    def guard_holds(self, coins: tuple[int, ...]) -> bool:
        if self.kind == SUB:
            return all(coins[g - 1] > 0 for g in self.glasses)
        if self.kind == EMPTY_CHECK:
            return all(coins[g - 1] == 0 for g in self.glasses)
        return True  # Add and Stop are unconditional

    def apply(self, coins: tuple[int, ...]) -> tuple[int, ...]:
        out = list(coins)
        if self.kind == ADD:
            for g in self.glasses:
                out[g - 1] += 1
        elif self.kind == SUB:
            for g in self.glasses:
                out[g - 1] -= 1
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "from": self.input_state,
            "to": self.output_state,
            "glasses": list(self.glasses),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Command":
        return cls(
            kind=data["kind"],
            input_state=int(data["from"]),
            output_state=int(data["to"]),
            glasses=tuple(int(g) for g in data.get("glasses", [])),
        )


@dataclass(frozen=True)
class Configuration:
    state: int
    coins: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coins", tuple(int(c) for c in self.coins))
        if any(c < 0 for c in self.coins):
            raise ValueError("coin counts must be nonnegative")


@dataclass(frozen=True)
class MinskyMachine:
    """k glasses, states 0..states-1 (0 = halt, 1 = start), guarded commands.

    ``state_names`` records human-readable labels for states introduced by
    the machine transformations (e.g. fresh ids standing in for primed
    labels); it has no semantic effect.
    """

    glasses: int
    states: int
    commands: tuple[Command, ...]
    state_names: dict[int, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        if self.glasses < 1:
            raise ValueError("need at least one glass")
        if self.states < 2:
            raise ValueError("need at least the halt and start states")
        for cmd in self.commands:
            for s in (cmd.input_state, cmd.output_state):
                if not 0 <= s < self.states:
                    raise ValueError(f"command references unknown state {s}")
            for g in cmd.glasses:
                if not 1 <= g <= self.glasses:
                    raise ValueError(f"command references unknown glass {g}")

    def start_configuration(self, n: int) -> Configuration:
        return Configuration(1, (n,) + (0,) * (self.glasses - 1))

    def accept_configuration(self) -> Configuration:
        return Configuration(0, (0,) * self.glasses)

    def to_json(self) -> dict:
        return {
            "glasses": self.glasses,
            "states": self.states,
            "commands": [c.to_json() for c in self.commands],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MinskyMachine":
        return cls(
            glasses=int(data["glasses"]),
            states=int(data["states"]),
            commands=tuple(Command.from_json(c) for c in data["commands"]),
        )


@dataclass(frozen=True)
class RunResult:
    status: str  # "accepted" | "stuck" | "timeout"
    steps: int | None = None
    config: Configuration | None = None

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"


def applicable_commands(m: MinskyMachine, c: Configuration) -> list[Command]:
    """Commands whose input state and glass guards hold at ``c``."""
    return [
        cmd
        for cmd in m.commands
        if cmd.input_state == c.state and cmd.guard_holds(c.coins)
    ]


def _guards_overlap(a: Command, b: Command) -> bool:
    """Whether some configuration satisfies both guards (same input state).

    Only a Sub paired with an EmptyCheck over intersecting glasses is
    contradictory; every other pairing is jointly satisfiable.
    """
    kinds = {a.kind, b.kind}
    if kinds == {SUB, EMPTY_CHECK}:
        sub = a if a.kind == SUB else b
        chk = b if a.kind == SUB else a
        return not (set(sub.glasses) & set(chk.glasses))
    return True


def is_deterministic(m: MinskyMachine) -> bool:
    by_state: dict[int, list[Command]] = {}
    for cmd in m.commands:
        by_state.setdefault(cmd.input_state, []).append(cmd)
    for cmds in by_state.values():
        for i in range(len(cmds)):
            for j in range(i + 1, len(cmds)):
                if _guards_overlap(cmds[i], cmds[j]):
                    return False
    return True


def run(m: MinskyMachine, input: int, max_steps: int) -> RunResult:
    """Deterministic simulation from ``(1; input, 0, ..., 0)``."""
    if not is_deterministic(m):
        raise NondeterministicMachine("run requires a deterministic machine")
    accept = m.accept_configuration()
    c = m.start_configuration(input)
    for step in range(max_steps + 1):
        if c == accept:
            return RunResult("accepted", steps=step)
        cmds = applicable_commands(m, c)
        if not cmds:
            return RunResult("stuck", steps=step, config=c)
        if step == max_steps:
            break
        cmd = cmds[0]
        c = Configuration(cmd.output_state, cmd.apply(c.coins))
    return RunResult("timeout", steps=max_steps, config=c)


def _neighbours(m: MinskyMachine, c: Configuration) -> Iterable[Configuration]:
    # forward edges
    for cmd in applicable_commands(m, c):
        yield Configuration(cmd.output_state, cmd.apply(c.coins))
    # inverse edges: a command i -> j read backwards from state j
    for cmd in m.commands:
        if cmd.output_state != c.state:
            continue
        if cmd.kind == ADD:
            if all(c.coins[g - 1] > 0 for g in cmd.glasses):
                coins = list(c.coins)
                for g in cmd.glasses:
                    coins[g - 1] -= 1
                yield Configuration(cmd.input_state, tuple(coins))
        elif cmd.kind == SUB:
            coins = list(c.coins)
            for g in cmd.glasses:
                coins[g - 1] += 1
            yield Configuration(cmd.input_state, tuple(coins))
        else:  # EmptyCheck / Stop leave coins alone; the guard must hold
            if cmd.guard_holds(c.coins):
                yield Configuration(cmd.input_state, c.coins)


def equivalence_closure(
    m: MinskyMachine, c: Configuration, bound: int
) -> set[Configuration]:
    """Configurations reachable from ``c`` by at most ``bound`` moves, where a
    move applies a command forwards or backwards."""
    seen = {c}
    frontier = deque([c])
    for _ in range(bound):
        if not frontier:
            break
        next_frontier: deque[Configuration] = deque()
        while frontier:
            cur = frontier.popleft()
            for nb in _neighbours(m, cur):
                if nb not in seen:
                    seen.add(nb)
                    next_frontier.append(nb)
        frontier = next_frontier
    return seen


def add_glass_extension(m: MinskyMachine) -> MinskyMachine:
    """Extend a deterministic k-glass machine with a tracking glass k+1.

    The new machine accepts exactly the same inputs, but additionally has the
    property that an unaccepted input configuration is equivalent only to
    itself among state-1 configurations.  It reroutes the old halt and start
    states through seven fresh states: the input is first copied into glasses
    2 and k+1, restored into glass 1, then the original program runs (it
    never touches glass k+1), and on success the tracking glass is drained
    before halting.
    """
    if not is_deterministic(m):
        raise NondeterministicMachine("extension requires a deterministic machine")
    k = m.glasses
    base = m.states
    # fresh ids for the primed states 0'..6'
    prime = {i: base + i for i in range(7)}
    names = dict(m.state_names)
    names.update({prime[i]: f"{i}'" for i in range(7)})

    def rename(s: int) -> int:
        return prime[s] if s in (0, 1) else s

    commands = [
        replace(cmd, input_state=rename(cmd.input_state), output_state=rename(cmd.output_state))
        for cmd in m.commands
    ]
    commands += [
        Command(EMPTY_CHECK, 1, prime[2], tuple(range(2, k + 2))),
        Command(SUB, prime[2], prime[3], (1,)),
        Command(ADD, prime[3], prime[2], (2, k + 1)),
        Command(EMPTY_CHECK, prime[2], prime[4], (1,)),
        Command(SUB, prime[4], prime[5], (2,)),
        Command(ADD, prime[5], prime[4], (1,)),
        Command(EMPTY_CHECK, prime[4], prime[1], (2,)),
        Command(EMPTY_CHECK, prime[0], prime[6], tuple(range(1, k + 1))),
        Command(SUB, prime[6], prime[6], (k + 1,)),
        Command(EMPTY_CHECK, prime[6], 0, (k + 1,)),
    ]
    return MinskyMachine(
        glasses=k + 1, states=base + 7, commands=tuple(commands), state_names=names
    )


def p_cycle_extension(m: MinskyMachine, p: int) -> MinskyMachine:
    """Splice a p-step add-cycle onto the start state.

    Adds states 2'..p' and commands 1 -> 2' -> ... -> p' -> 1, each adding a
    coin to glass 1.  Since the first new command leaves state 1
    unconditionally, the result is nondeterministic whenever state 1 has any
    other outgoing command: a run may pump glass 1 by p any number of times
    before proceeding.
    """
    if p < 2:
        raise ValueError("cycle length must be at least 2")
    base = m.states
    prime = {i: base + (i - 2) for i in range(2, p + 1)}  # labels 2'..p'
    names = dict(m.state_names)
    names.update({prime[i]: f"{i}'" for i in range(2, p + 1)})
    commands = list(m.commands)
    commands.append(Command(ADD, 1, prime[2], (1,)))
    for i in range(2, p):
        commands.append(Command(ADD, prime[i], prime[i + 1], (1,)))
    commands.append(Command(ADD, prime[p], 1, (1,)))
    return MinskyMachine(
        glasses=m.glasses,
        states=base + p - 1,
        commands=tuple(commands),
        state_names=names,
    )


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def is_primitive_root(r: int, p: int) -> bool:
    """Whether r generates the multiplicative group mod the prime p."""
    if not _is_prime(p):
        raise ValueError("p must be prime")
    if not 1 <= r < p:
        raise ValueError("need 1 <= r < p")
    val, order = r, 1
    while val != 1:
        val = val * r % p
        order += 1
    return order == p - 1


def prime_sequence(r: int, n: int) -> int:
    """The n-th prime above r whose multiplicative group is generated by r."""
    if n < 1:
        raise ValueError("n must be positive")
    found = 0
    candidate = r
    while True:
        candidate += 1
        if _is_prime(candidate) and is_primitive_root(r, candidate):
            found += 1
            if found == n:
                return candidate
