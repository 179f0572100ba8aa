"""Finite normal-form games stored as dense utility tensors.

A game is a list of per-player tensors, one axis per player, C order.
Potential games carry their potential tensor explicitly; the exactness of
the potential identity is checked exhaustively, never sampled.  Expected
utility vectors are computed by a canonical contraction: the player's axis
is moved to the front once, then the remaining axes are contracted from the
last one down.  Contracting in a fixed order keeps runs reproducible and
makes equal inputs give bitwise-equal outputs on permutation-symmetric
tensors, which the symmetric-game diagnostics rely on.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .learners import Vector

TAG_IDENTICAL = "identical_interest"
TAG_POTENTIAL = "potential"
TAG_SYMMETRIC = "symmetric"

POTENTIAL_TOL = 1e-12


@dataclass
class GameSpec:
    action_counts: tuple
    utilities: list  # one ndarray of shape action_counts per player
    potential: Optional[np.ndarray] = None
    tags: frozenset = field(default_factory=frozenset)

    @property
    def num_players(self) -> int:
        return len(self.action_counts)

    def __post_init__(self):
        self.action_counts = tuple(int(m) for m in self.action_counts)
        if any(m < 1 for m in self.action_counts):
            raise ValueError(f"action counts must be positive, got {self.action_counts}")
        if len(self.utilities) != self.num_players:
            raise ValueError(
                f"{len(self.utilities)} utility tensors for {self.num_players} players"
            )
        self.utilities = [np.asarray(u, dtype=np.float64) for u in self.utilities]
        for i, u in enumerate(self.utilities):
            if u.shape != self.action_counts:
                raise ValueError(f"utility tensor {i} has shape {u.shape}, want {self.action_counts}")
            if not np.all(np.isfinite(u)):
                raise ValueError(f"utility tensor {i} has non-finite entries")
        self.tags = frozenset(self.tags)
        if TAG_IDENTICAL in self.tags:
            for i in range(1, self.num_players):
                if not np.array_equal(self.utilities[0], self.utilities[i]):
                    raise ValueError("identical-interest tag but utilities differ")
            if self.potential is None:
                self.potential = self.utilities[0]
            self.tags = self.tags | {TAG_POTENTIAL}
        if self.potential is not None:
            self.potential = np.asarray(self.potential, dtype=np.float64)
            if self.potential.shape != self.action_counts:
                raise ValueError(
                    f"potential shape {self.potential.shape}, want {self.action_counts}"
                )


def _contract_others(tensor: np.ndarray, player: int, profile) -> Vector:
    # canonical order: own axis first, then fold the trailing axes in
    t = np.ascontiguousarray(np.moveaxis(tensor, player, 0))
    others = [profile[j] for j in range(tensor.ndim) if j != player]
    for j in range(len(others) - 1, -1, -1):
        t = np.tensordot(t, np.asarray(others[j], dtype=np.float64), axes=([j + 1], [0]))
    return t


def utility_vector(game: GameSpec, player: int, profile) -> Vector:
    """Expected utility of each own action against the opponents' mixtures."""
    if not 0 <= player < game.num_players:
        raise IndexError(f"player {player} out of range")
    _check_profile(game.action_counts, profile)
    return _contract_others(game.utilities[player], player, profile)


def mixed_tensor_value(tensor: np.ndarray, profile) -> float:
    """Multilinear extension of a tensor evaluated at a mixed profile."""
    t = tensor
    for j in range(tensor.ndim - 1, -1, -1):
        t = np.tensordot(t, np.asarray(profile[j], dtype=np.float64), axes=([j], [0]))
    return float(t)


def mixed_potential(game: GameSpec, profile) -> float:
    if game.potential is None:
        raise ValueError("game has no potential tensor")
    _check_profile(game.action_counts, profile)
    return mixed_tensor_value(game.potential, profile)


def _check_profile(action_counts, profile):
    if len(profile) != len(action_counts):
        raise ValueError(f"profile has {len(profile)} blocks, want {len(action_counts)}")
    for j, (x, m) in enumerate(zip(profile, action_counts)):
        x = np.asarray(x)
        if x.shape != (m,):
            raise ValueError(f"block {j} has shape {x.shape}, want ({m},)")


def verify_potential(game: GameSpec):
    """Exhaustively check the potential identity over all unilateral deviations.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness names
    the player, the joint action, the deviation, and both sides of the first
    violated identity.  Player i's identity is equivalent to ``u_i - potential``
    being constant along axis i, which is what gets scanned.
    """
    if game.potential is None:
        raise ValueError("game has no potential tensor")
    for i in range(game.num_players):
        d = game.utilities[i] - game.potential
        spread = d.max(axis=i) - d.min(axis=i)
        if float(spread.max()) <= POTENTIAL_TOL:
            continue
        rest = np.unravel_index(int(np.argmax(spread)), spread.shape)
        hi = int(np.argmax([d[rest[:i] + (a,) + rest[i:]] for a in range(game.action_counts[i])]))
        lo = int(np.argmin([d[rest[:i] + (a,) + rest[i:]] for a in range(game.action_counts[i])]))
        base = rest[:i] + (lo,) + rest[i:]
        dev = rest[:i] + (hi,) + rest[i:]
        witness = {
            "player": i,
            "action": base,
            "deviation": dev,
            "potential_diff": float(game.potential[dev] - game.potential[base]),
            "utility_diff": float(game.utilities[i][dev] - game.utilities[i][base]),
        }
        return False, witness
    return True, None


def random_potential_game(
    num_players: int, action_counts, seed: int, dummy_shifts: bool = True
) -> GameSpec:
    """Potential tensor with i.i.d. uniform[0,1] entries.

    With ``dummy_shifts`` each player's utility adds a random term that is
    constant in their own action, so the game is a potential game without
    being identical-interest.
    """
    action_counts = tuple(int(m) for m in action_counts)
    if len(action_counts) != num_players:
        raise ValueError("one action count per player")
    rng = np.random.default_rng(seed)
    pot = rng.uniform(0.0, 1.0, size=action_counts)
    utilities = []
    tags = {TAG_POTENTIAL}
    for i in range(num_players):
        if dummy_shifts:
            shape = action_counts[:i] + (1,) + action_counts[i + 1 :]
            utilities.append(pot + rng.uniform(0.0, 1.0, size=shape))
        else:
            utilities.append(pot.copy())
    if not dummy_shifts:
        tags.add(TAG_IDENTICAL)
    return GameSpec(action_counts, utilities, potential=pot, tags=frozenset(tags))


def random_symmetric_identical_game(num_players: int, num_actions: int, seed: int) -> GameSpec:
    """Identical-interest game whose tensor is invariant under axis permutation.

    The entry at a joint action depends only on the multiset of actions, so
    every player contracting against equal opponent mixtures sees the same
    utility vector.
    """
    rng = np.random.default_rng(seed)
    values = {}
    shape = (num_actions,) * num_players
    pot = np.empty(shape)
    for idx in np.ndindex(shape):
        key = tuple(sorted(idx))
        if key not in values:
            values[key] = rng.uniform(0.0, 1.0)
        pot[idx] = values[key]
    return GameSpec(
        (num_actions,) * num_players,
        [pot.copy() for _ in range(num_players)],
        potential=pot,
        tags=frozenset({TAG_IDENTICAL, TAG_SYMMETRIC}),
    )


def random_congestion_game(num_players: int, num_resources: int, seed: int) -> GameSpec:
    """Each player picks one resource; cost depends on how many picked it.

    Utilities are negated costs.  The exact potential sums, per resource,
    the marginal costs of each unit of load in turn.
    """
    rng = np.random.default_rng(seed)
    costs = rng.uniform(0.0, 1.0, size=(num_resources, num_players))  # cost at load 1..n
    shape = (num_resources,) * num_players
    utilities = [np.empty(shape) for _ in range(num_players)]
    pot = np.empty(shape)
    for idx in np.ndindex(shape):
        loads = np.bincount(idx, minlength=num_resources)
        for i in range(num_players):
            utilities[i][idx] = -costs[idx[i], loads[idx[i]] - 1]
        pot[idx] = -sum(
            costs[r, k] for r in range(num_resources) for k in range(loads[r])
        )
    return GameSpec(
        shape,
        utilities,
        potential=pot,
        tags=frozenset({TAG_POTENTIAL, TAG_SYMMETRIC}),
    )


def check_symmetric(game: GameSpec, trials: int = 50, seed: int = 0, atol: float = 1e-9) -> bool:
    """All players see the same utility vector whenever all mixtures are equal."""
    counts = set(game.action_counts)
    if len(counts) != 1:
        return False
    m = counts.pop()
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x = rng.dirichlet(np.ones(m))
        profile = [x] * game.num_players
        u0 = utility_vector(game, 0, profile)
        for i in range(1, game.num_players):
            if not np.allclose(u0, utility_vector(game, i, profile), rtol=0.0, atol=atol):
                return False
    return True


def utility_range(game: GameSpec) -> float:
    """Largest entry spread across the utility tensors and the potential."""
    spans = [float(u.max() - u.min()) for u in game.utilities]
    if game.potential is not None:
        spans.append(float(game.potential.max() - game.potential.min()))
    return max(spans)


def normalize_game(game: GameSpec) -> GameSpec:
    """Divide every tensor by the largest range so each spread is at most one."""
    span = utility_range(game)
    if span <= 0.0:
        return game
    return GameSpec(
        game.action_counts,
        [u / span for u in game.utilities],
        potential=None if game.potential is None else game.potential / span,
        tags=game.tags,
    )


def _kind_of(game: GameSpec) -> str:
    if TAG_IDENTICAL in game.tags:
        return "identical_interest"
    if TAG_POTENTIAL in game.tags or game.potential is not None:
        return "potential"
    return "general"


def game_json_dict(game: GameSpec) -> dict:
    """The on-disk document for a game; flat tensors use C order."""
    doc = {
        "players": game.num_players,
        "actions": list(game.action_counts),
        "kind": _kind_of(game),
    }
    if game.num_players == 2 and TAG_IDENTICAL in game.tags:
        doc["payoff_matrix"] = game.utilities[0].tolist()
    else:
        doc["utilities"] = [u.reshape(-1).tolist() for u in game.utilities]
        if game.potential is not None:
            doc["potential"] = game.potential.reshape(-1).tolist()
    if TAG_SYMMETRIC in game.tags:
        doc["symmetric"] = True
    return doc


def save_game(game: GameSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(game_json_dict(game), fh)
        fh.write("\n")


def load_game(path) -> GameSpec:
    """Read a game file, validating shapes and (when present) the potential."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    for key in ("players", "actions", "kind"):
        if key not in doc:
            raise ValueError(f"{path}: missing field '{key}'")
    n = int(doc["players"])
    actions = tuple(int(m) for m in doc["actions"])
    if len(actions) != n:
        raise ValueError(f"{path}: field 'actions' has {len(actions)} entries for {n} players")
    kind = doc["kind"]
    if kind not in ("identical_interest", "potential", "general"):
        raise ValueError(f"{path}: unknown kind '{kind}'")
    tags = set()
    if kind == "identical_interest":
        tags.add(TAG_IDENTICAL)
    if kind in ("identical_interest", "potential"):
        tags.add(TAG_POTENTIAL)
    if doc.get("symmetric"):
        tags.add(TAG_SYMMETRIC)

    if "payoff_matrix" in doc:
        if n != 2 or kind != "identical_interest":
            raise ValueError(f"{path}: 'payoff_matrix' is the 2-player identical-interest shortcut")
        a = np.asarray(doc["payoff_matrix"], dtype=np.float64)
        if a.shape != actions:
            raise ValueError(f"{path}: 'payoff_matrix' has shape {a.shape}, want {actions}")
        utilities = [a, a.copy()]
        potential = None
    else:
        if "utilities" not in doc:
            raise ValueError(f"{path}: missing field 'utilities'")
        flats = doc["utilities"]
        if len(flats) != n:
            raise ValueError(f"{path}: field 'utilities' has {len(flats)} tensors for {n} players")
        size = int(np.prod(actions))
        utilities = []
        for i, flat in enumerate(flats):
            if len(flat) != size:
                raise ValueError(f"{path}: utilities[{i}] has {len(flat)} entries, want {size}")
            utilities.append(np.asarray(flat, dtype=np.float64).reshape(actions))
        potential = None
        if "potential" in doc:
            if len(doc["potential"]) != size:
                raise ValueError(f"{path}: 'potential' has {len(doc['potential'])} entries, want {size}")
            potential = np.asarray(doc["potential"], dtype=np.float64).reshape(actions)
    game = GameSpec(actions, utilities, potential=potential, tags=frozenset(tags))
    if game.potential is not None:
        ok, witness = verify_potential(game)
        if not ok:
            raise ValueError(f"{path}: potential identity fails: {witness}")
    if kind == "potential" and game.potential is None:
        raise ValueError(f"{path}: kind 'potential' but no potential tensor")
    return game
