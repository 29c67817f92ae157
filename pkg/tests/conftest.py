from __future__ import annotations

import pytest

from cgbench.tasks import puzzle as puzzle_task


@pytest.fixture(scope="session")
def generated_puzzles() -> list[puzzle_task.PuzzleInstance]:
    """A small cross-size cache of generated puzzles shared across tests."""
    out = []
    for k, m in [(2, 2), (2, 3), (3, 3), (4, 4)]:
        for seed in range(4):
            out.append(puzzle_task.generate(puzzle_task.PuzzleSpec(k, m, seed=seed)))
    return out
