"""Slot values behind the golden prompt files."""
from pathlib import Path

GOLDENS = Path(__file__).parent / "goldens"

TASK = "Predict whether a patient is a smoker from bio-signals. The evaluation metric is accuracy."
SCRIPT = 'import pandas as pd\nprint("final accuracy on validation set: 0.5")'
BUGGY_SCRIPT = "import pandas as pd\nprint(model)"
PLAN = "Replace the logistic regression with a random forest of 200 trees."
RUNNING_LOG = "[Step 1]\nBaseline logistic regression reached 0.5."
EXEC_LOG = (
    "Traceback (most recent call last):\n"
    '  File "train.py", line 2, in <module>\n'
    "NameError: name 'model' is not defined"
)
CASES = [
    "Gradient boosting with 5-fold CV worked best.",
    "Standardize numeric columns before linear models.",
]
EXAMPLE_TASK = "Predict house prices from tabular features."
EXAMPLE_SCAFFOLD = "import pandas as pd"
EXAMPLE_SOLUTION = 'print("solved")'


def golden(name: str) -> str:
    """Golden text without the file's final newline."""
    text = (GOLDENS / f"{name}.txt").read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text
