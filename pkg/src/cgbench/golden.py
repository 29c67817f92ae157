"""The three worked instances used as golden rendering anchors."""

from __future__ import annotations

from .tasks import dp, multiplication, puzzle


def multiplication_example() -> multiplication.MultInstance:
    return multiplication.MultInstance(35, 90)


def dp_example() -> dp.DpInstance:
    return dp.DpInstance((3, 2, 1, 5, 2))


def puzzle_example() -> puzzle.PuzzleInstance:
    """The 3-house name/sport/car puzzle with its six clues."""
    name = puzzle._CATALOG_BY_KEY["Name"].trimmed(("peter", "eric", "arnold"))
    sport = puzzle._CATALOG_BY_KEY["FavoriteSport"].trimmed(("soccer", "tennis", "basketball"))
    car = puzzle._CATALOG_BY_KEY["CarModel"].trimmed(("tesla model 3", "ford f150", "toyota camry"))
    attrs = (name, sport, car)
    solution = {
        "Name": ("eric", "peter", "arnold"),
        "FavoriteSport": ("basketball", "tennis", "soccer"),
        "CarModel": ("toyota camry", "ford f150", "tesla model 3"),
    }
    clues = (
        puzzle.make_clue("same_house", (("CarModel", "ford f150"), ("FavoriteSport", "tennis")), attrs),
        puzzle.make_clue("found_at", (("Name", "arnold"), 3), attrs),
        puzzle.make_clue("direct_left", (("CarModel", "toyota camry"), ("CarModel", "ford f150")), attrs),
        puzzle.make_clue("same_house", (("Name", "eric"), ("CarModel", "toyota camry")), attrs),
        puzzle.make_clue("same_house", (("FavoriteSport", "basketball"), ("Name", "eric")), attrs),
        puzzle.make_clue("besides", (("FavoriteSport", "tennis"), ("FavoriteSport", "soccer")), attrs),
    )
    return puzzle.PuzzleInstance(3, 3, attrs, solution, clues, seed=0)
