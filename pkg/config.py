# dtsat/config.py
import os

# --- Solver Budgets ---

# Maximum number of levels an exploration may retain before giving up.
# Exceeding it is reported as a budget outcome, never as a negative answer.
BUDGET_LEVELS = int(os.environ.get("DTSAT_BUDGET_LEVELS", 10**6))

# Maximum valuation sum of any configuration in a retained level.
BUDGET_VALSUM = int(os.environ.get("DTSAT_BUDGET_VALSUM", 64))

# Cap on the rounds of the backward fixed point for doomed levels.
FIXPOINT_ROUNDS = int(os.environ.get("DTSAT_FIXPOINT_ROUNDS", 10_000))

# Cap on the data labellings tried when turning a shape witness into a data tree.
LIFT_CANDIDATES = int(os.environ.get("DTSAT_LIFT_CANDIDATES", 200_000))

# --- Membership Oracle ---

# Longest block of silent moves tried at one node by `itca member`.
BLOCK_BOUND = int(os.environ.get("DTSAT_BLOCK_BOUND", 64))

# --- Logging ---
LOG_LEVEL = os.environ.get("DTSAT_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
