"""Counted random stream used by the engine.

Every random decision in a game is made by drawing uniform floats from a
single seeded stream.  The stream state is therefore fully described by
``(seed, draws)``, which makes it cheap to serialize into an event log and
to reconstruct after a replay or a process restart: re-seed and fast-forward
by the recorded number of draws.
"""

from __future__ import annotations

import random


class GameRng:
    """Seeded uniform stream that counts how many floats it has produced."""

    def __init__(self, seed: int, draws: int = 0) -> None:
        self.seed = seed
        self.draws = 0
        self._stream = random.Random(seed)
        for _ in range(draws):
            self.uniform()

    def uniform(self) -> float:
        """Return the next float in [0, 1) and advance the draw counter."""
        self.draws += 1
        return self._stream.random()

    def pick_weighted(self, items: list, weights: list[float]):
        """Pick one item by weight.  Consumes exactly one draw."""
        if not items or len(items) != len(weights):
            raise ValueError(f"need matching nonempty items and weights, got {len(items)}/{len(weights)}")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        total = float(sum(weights))
        if total <= 0:
            raise ValueError("weights must sum to a positive total")
        target = self.uniform() * total
        acc = 0.0
        for item, weight in zip(items, weights):
            acc += weight
            if target < acc:
                return item
        return items[-1]

    def pick_distinct(self, items: list, count: int) -> list:
        """Pick ``count`` distinct items via a partial shuffle.

        Consumes exactly ``count`` draws regardless of outcome, which keeps
        the draw count derivable from logged events.
        """
        if not 0 <= count <= len(items):
            raise ValueError(f"cannot pick {count} distinct items from {len(items)}")
        pool = list(items)
        picked = []
        for i in range(count):
            j = i + int(self.uniform() * (len(pool) - i))
            pool[i], pool[j] = pool[j], pool[i]
            picked.append(pool[i])
        return picked

    def state(self) -> tuple[int, int]:
        return (self.seed, self.draws)

    def copy(self) -> GameRng:
        # Clone via the underlying generator state; re-drawing from the seed
        # would cost O(draws) per copy.
        clone = GameRng(self.seed)
        clone.draws = self.draws
        clone._stream.setstate(self._stream.getstate())
        return clone

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GameRng):
            return NotImplemented
        return self.state() == other.state()

    def __repr__(self) -> str:
        return f"GameRng(seed={self.seed}, draws={self.draws})"
