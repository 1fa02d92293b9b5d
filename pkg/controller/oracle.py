"""
controller/oracle.py
--------------------
Brute-force ground truth on the strategy lattice.

Every node's efforts are restricted to multiples of B_v / g. Profiles are
enumerated lexicographically by node id, then edge id, as flat indices
into the product of the per-node lattices; rewards are tabulated once per
edge on the (g+1) x (g+1) effort levels so that welfare, unilateral and
bilateral checks become numpy gathers.

Grid stability is neither necessary nor sufficient for continuous
stability: ``screen_equilibria`` re-checks candidates with the exact
verifier before they are cited anywhere.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from controller.allocation import lattice_points, lattice_size, node_terms
from controller.equilibria import grid_pairs, verify_pairwise
from model.da.config import Settings
from model.entity.game import Game
from model.entity.profile import Profile
from model.entity.results import GridSpec
from model.entity.welfare import node_utility, social_welfare
from model.tools.errors import GridCapExceeded
from model.tools.logger import Logger

CHUNK = 1 << 15


class _Lattice:
    """Index form of the profile lattice of one game at one resolution."""

    def __init__(self, game: Game, resolution: int) -> None:
        self.game = game
        self.resolution = resolution
        self.nodes = game.node_ids
        self.index = {v: i for i, v in enumerate(self.nodes)}
        self.slots = [[e.id for e in game.incident(v)] for v in self.nodes]
        self.points: List[np.ndarray] = []
        self.steps: List[float] = []
        for v, slots in zip(self.nodes, self.slots):
            budget = game.budget(v)
            if budget > 0 and slots:
                pts = list(lattice_points(resolution, len(slots)))
                self.points.append(np.array(pts, dtype=np.int64).reshape(len(pts), len(slots)))
                self.steps.append(budget / resolution)
            else:
                self.points.append(np.zeros((1, len(slots)), dtype=np.int64))
                self.steps.append(0.0)
        levels = range(resolution + 1)
        self.tables = {}
        for edge in game.edges:
            su = self.steps[self.index[edge.u]]
            sv = self.steps[self.index[edge.v]]
            self.tables[edge.id] = np.array(
                [[edge.reward.value(a * su, b * sv) for b in levels] for a in levels]
            )
        # per node and slot: (edge id, partner index, partner slot, node is edge.u)
        self.links = []
        for i, v in enumerate(self.nodes):
            row = []
            for eid in self.slots[i]:
                edge = game.edge(eid)
                j = self.index[edge.other(v)]
                row.append((eid, j, self.slots[j].index(eid), edge.u == v))
            self.links.append(row)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(p) for p in self.points)

    @property
    def count(self) -> int:
        return math.prod(self.shape)

    def choices(self, start: int, stop: int) -> np.ndarray:
        flat = np.arange(start, stop)
        return np.stack(np.unravel_index(flat, self.shape), axis=1)

    def profile(self, choice: Sequence[int]) -> Profile:
        efforts = {}
        for i, c in enumerate(choice):
            row = {
                eid: int(level) * self.steps[i]
                for eid, level in zip(self.slots[i], self.points[i][int(c)])
                if level
            }
            if row:
                efforts[self.nodes[i]] = row
        return Profile(efforts)

    def _term(self, eid: str, is_u: bool, own, partner):
        table = self.tables[eid]
        return table[own, partner] if is_u else table[partner, own]

    def welfare(self, choices: np.ndarray) -> np.ndarray:
        total = np.zeros(len(choices))
        for edge in self.game.edges:
            iu, iv = self.index[edge.u], self.index[edge.v]
            a = self.points[iu][choices[:, iu], self.slots[iu].index(edge.id)]
            b = self.points[iv][choices[:, iv], self.slots[iv].index(edge.id)]
            total += self.tables[edge.id][a, b]
        return 2.0 * total

    def utilities(self, i: int, choices: np.ndarray) -> np.ndarray:
        """Node i's utility for each of its lattice points (columns) per row of choices."""
        out = np.zeros((len(choices), len(self.points[i])))
        for k, (eid, j, kj, is_u) in enumerate(self.links[i]):
            partner = self.points[j][choices[:, j], kj]
            own = self.points[i][:, k]
            out += self._term(eid, is_u, own[None, :], partner[:, None])
        return out

    def nash_mask(self, choices: np.ndarray, tol: float) -> np.ndarray:
        mask = np.ones(len(choices), dtype=bool)
        rows = np.arange(len(choices))
        for i in range(len(self.nodes)):
            if not self.slots[i] or len(self.points[i]) == 1:
                continue
            util = self.utilities(i, choices)
            current = util[rows, choices[:, i]]
            mask &= util.max(axis=1) <= current + tol
        return mask

    def pair_improvable(self, choice: np.ndarray, tol: float) -> bool:
        """Some edge admits a lattice move improving both endpoints."""
        row = choice[None, :]
        for edge in self.game.sorted_edges():
            iu, iv = self.index[edge.u], self.index[edge.v]
            ku, kv = self.slots[iu].index(edge.id), self.slots[iv].index(edge.id)
            table = self.tables[edge.id]
            col_u, col_v = self.points[iu][:, ku], self.points[iv][:, kv]
            a, b = col_u[choice[iu]], col_v[choice[iv]]
            util_u = self.utilities(iu, row)[0]
            util_v = self.utilities(iv, row)[0]
            best_u = np.full(self.resolution + 1, -np.inf)
            best_v = np.full(self.resolution + 1, -np.inf)
            np.maximum.at(best_u, col_u, util_u - table[col_u, b])
            np.maximum.at(best_v, col_v, util_v - table[a, col_v])
            gain_u = best_u[:, None] + table - util_u[choice[iu]]
            gain_v = best_v[None, :] + table - util_v[choice[iv]]
            if np.any((gain_u > tol) & (gain_v > tol)):
                return True
        return False


def lattice_count(game: Game, gridspec: GridSpec) -> int:
    """Number of lattice profiles, prod_v C(g + deg_v, deg_v) over nodes with budget."""
    return math.prod(
        lattice_size(gridspec.resolution, game.degree(v))
        for v in game.node_ids
        if game.budget(v) > 0 and game.degree(v) > 0
    )


def _checked(game: Game, gridspec: GridSpec) -> _Lattice:
    required = lattice_count(game, gridspec)
    if required > gridspec.cap:
        Logger.warning(f"Grid refused: {required} profiles exceed cap {gridspec.cap}.")
        raise GridCapExceeded(required, gridspec.cap)
    Logger.info(f"Grid enumeration of {required} profiles at resolution {gridspec.resolution}.")
    return _Lattice(game, gridspec.resolution)


def grid_optimum(game: Game, gridspec: Optional[GridSpec] = None) -> Tuple[Profile, float]:
    """
    Lattice profile of maximum welfare; the first one in enumeration order
    wins ties. The welfare is a lower bound on the continuous optimum.

    Raises:
        GridCapExceeded: the lattice is larger than ``gridspec.cap``.
    """
    gridspec = gridspec or GridSpec()
    lattice = _checked(game, gridspec)
    if not lattice.nodes:
        return Profile.zero(), 0.0
    best_index, best_value = 0, -math.inf
    for start in range(0, lattice.count, CHUNK):
        stop = min(start + CHUNK, lattice.count)
        values = lattice.welfare(lattice.choices(start, stop))
        k = int(np.argmax(values))
        if values[k] > best_value:
            best_index, best_value = start + k, float(values[k])
    choice = np.unravel_index(best_index, lattice.shape)
    profile = lattice.profile(choice)
    return profile, social_welfare(game, profile)


def _stable_indices(lattice: _Lattice, start: int, stop: int, tol: float) -> List[int]:
    found = []
    for lo in range(start, stop, CHUNK):
        hi = min(lo + CHUNK, stop)
        choices = lattice.choices(lo, hi)
        for offset in np.flatnonzero(lattice.nash_mask(choices, tol)):
            if not lattice.pair_improvable(choices[offset], tol):
                found.append(lo + int(offset))
    return found


def _stable_slice(args) -> List[int]:
    game, resolution, tol, start, stop = args
    return _stable_indices(_Lattice(game, resolution), start, stop, tol)


def grid_equilibria(
    game: Game,
    gridspec: Optional[GridSpec] = None,
    settings: Optional[Settings] = None,
    jobs: int = 1,
) -> List[Profile]:
    """
    Every lattice profile with no improving lattice move by a single node
    or by the two endpoints of an edge.

    With ``jobs`` > 1 the flat index range is split into contiguous slices
    checked in worker processes; results are merged in index order.

    Raises:
        GridCapExceeded: the lattice is larger than ``gridspec.cap``.
    """
    gridspec = gridspec or GridSpec()
    settings = settings or Settings()
    lattice = _checked(game, gridspec)
    if not lattice.nodes:
        return [Profile.zero()]
    count = lattice.count
    if jobs > 1 and count > CHUNK:
        bounds = np.linspace(0, count, jobs + 1, dtype=np.int64)
        tasks = [
            (game, gridspec.resolution, settings.tol, int(lo), int(hi))
            for lo, hi in zip(bounds, bounds[1:])
            if hi > lo
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            indices = [i for part in pool.map(_stable_slice, tasks) for i in part]
    else:
        indices = _stable_indices(lattice, 0, count, settings.tol)
    Logger.info(f"Grid search found {len(indices)} lattice equilibria.")
    return [lattice.profile(np.unravel_index(i, lattice.shape)) for i in indices]


def is_grid_stable(
    game: Game,
    profile: Profile,
    gridspec: Optional[GridSpec] = None,
    settings: Optional[Settings] = None,
) -> bool:
    """
    No node and no adjacent pair improves by moving to lattice strategies,
    everybody else staying at ``profile`` (which need not be on the lattice).
    """
    gridspec = gridspec or GridSpec()
    settings = settings or Settings()
    tol, g = settings.tol, gridspec.resolution
    for node in game.node_ids:
        budget = game.budget(node)
        terms = node_terms(game, profile, node)
        if budget <= 0 or not terms:
            continue
        current = node_utility(game, profile, node)
        step = budget / g
        for point in lattice_points(g, len(terms)):
            value = sum(t.value(k * step) for t, k in zip(terms, point))
            if value > current + tol:
                return False
    for edge in game.sorted_edges():
        required = lattice_size(g, game.degree(edge.u)) * lattice_size(g, game.degree(edge.v))
        if required > gridspec.cap:
            raise GridCapExceeded(required, gridspec.cap, "pair moves")
        before_u = node_utility(game, profile, edge.u)
        before_v = node_utility(game, profile, edge.v)
        for _, _, after_u, after_v in grid_pairs(game, profile, edge, g):
            if after_u > before_u + tol and after_v > before_v + tol:
                return False
    return True


def screen_equilibria(
    game: Game, profiles: Iterable[Profile], settings: Optional[Settings] = None
) -> List[Profile]:
    """Keep the lattice equilibria that also pass the continuous verifier."""
    settings = settings or Settings()
    kept = [p for p in profiles if verify_pairwise(game, p, settings).stable]
    Logger.info(f"Re-screening kept {len(kept)} lattice equilibria.")
    return kept
