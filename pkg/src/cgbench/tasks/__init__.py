from . import dp, multiplication, puzzle  # noqa: F401  (registers ops/order keys)

TASKS = (multiplication.TASK, puzzle.TASK, dp.TASK)
