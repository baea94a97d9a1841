"""Unit tests for execution result analysis."""
import pytest

from dsagent.executor import (
    DEFAULT_METRIC_PATTERN,
    ErrorKind,
    ExecutionResult,
    MetricDirection,
    MetricPatternError,
    classify_error,
    compile_metric_pattern,
    detect_error,
    extract_metric,
    is_improvement,
)


def failed(stderr: str, exit_code: int = 1) -> ExecutionResult:
    return ExecutionResult(exit_code=exit_code, stderr=stderr)


def traceback(last_line: str) -> str:
    return f'Traceback (most recent call last):\n  File "train.py", line 7, in <module>\n{last_line}\n'


class TestDetectError:
    """Test cases for the error decision rule."""

    def test_nonzero_exit(self):
        assert detect_error(ExecutionResult(exit_code=1)) is True

    def test_timeout(self):
        assert detect_error(ExecutionResult(exit_code=0, timed_out=True)) is True

    def test_swallowed_child_traceback(self):
        """A crashed child behind a clean parent exit still counts."""
        result = ExecutionResult(exit_code=0, stderr="warning\nTraceback (most recent call last):\n  ...\n")
        assert detect_error(result) is True

    def test_clean(self):
        assert detect_error(ExecutionResult(exit_code=0, stdout="ok", stderr="UserWarning: slow")) is False


class TestExtractMetric:
    """Test cases for metric parsing."""

    def test_default_pattern(self):
        assert extract_metric("epoch 1\nfinal accuracy on validation set: 0.85\n") == 0.85

    def test_last_match_wins(self):
        stdout = "final MAE on validation set: 4.0\nfinal MAE on validation set: 3.5\n"
        assert extract_metric(stdout) == 3.5

    def test_trailing_punctuation(self):
        assert extract_metric("final RMSE on validation set: 2.25.") == 2.25

    def test_scientific_notation(self):
        assert extract_metric("final loss on validation set: 1e-3") == pytest.approx(0.001)

    def test_no_match(self):
        assert extract_metric("training done") is None

    def test_custom_pattern(self):
        assert extract_metric("score=0.71", r"score=([0-9.]+)") == 0.71

    def test_pattern_needs_one_group(self):
        with pytest.raises(MetricPatternError):
            compile_metric_pattern(r"(a)(b)")
        with pytest.raises(MetricPatternError):
            compile_metric_pattern(r"no group")

    def test_invalid_regex(self):
        with pytest.raises(MetricPatternError):
            compile_metric_pattern(r"(unclosed")

    def test_default_is_valid(self):
        assert compile_metric_pattern(DEFAULT_METRIC_PATTERN).groups == 1


class TestIsImprovement:
    """Test cases for strict metric improvement."""

    def test_first_metric_counts(self):
        assert is_improvement(5.0, None, MetricDirection.LOWER_BETTER) is True

    def test_missing_metric_never_improves(self):
        assert is_improvement(None, 5.0, MetricDirection.LOWER_BETTER) is False
        assert is_improvement(None, None, MetricDirection.HIGHER_BETTER) is False

    def test_lower_better(self):
        assert is_improvement(4.0, 5.0, MetricDirection.LOWER_BETTER) is True
        assert is_improvement(6.0, 5.0, MetricDirection.LOWER_BETTER) is False

    def test_higher_better(self):
        assert is_improvement(0.9, 0.8, MetricDirection.HIGHER_BETTER) is True
        assert is_improvement(0.7, 0.8, MetricDirection.HIGHER_BETTER) is False

    def test_ties_do_not_improve(self):
        assert is_improvement(5.0, 5.0, MetricDirection.LOWER_BETTER) is False
        assert is_improvement(5.0, 5.0, MetricDirection.HIGHER_BETTER) is False


class TestClassifyError:
    """Test cases for error-mode classification."""

    @pytest.mark.parametrize(
        "last_line, kind",
        [
            ("NameError: name 'model' is not defined", ErrorKind.UNDEFINED_VARIABLE),
            ("UnboundLocalError: local variable 'x' referenced before assignment", ErrorKind.UNDEFINED_VARIABLE),
            ("ModuleNotFoundError: No module named 'lightgbm'", ErrorKind.MISSING_IMPORT),
            ("ImportError: cannot import name 'foo' from 'bar'", ErrorKind.MISSING_IMPORT),
            ("KeyError: 'price'", ErrorKind.KEY_ERROR),
            ("ValueError: could not convert string to float: 'abc'", ErrorKind.DTYPE_MISMATCH),
            (
                "ValueError: operands could not be broadcast together with shapes (3,) (4,)",
                ErrorKind.SHAPE_MISMATCH,
            ),
            ("RuntimeError: mat1 and mat2 shapes cannot be multiplied (4x3 and 5x2)", ErrorKind.SHAPE_MISMATCH),
            ("TypeError: fit() got an unexpected keyword argument 'epochs'", ErrorKind.INCORRECT_FUNCTION_CALL),
            ("AttributeError: 'DataFrame' object has no attribute 'ravel'", ErrorKind.INCORRECT_FUNCTION_CALL),
            ("SyntaxError: unexpected EOF while parsing", ErrorKind.INCOMPLETE_PROGRAM),
            ("IndentationError: expected an indented block", ErrorKind.INCOMPLETE_PROGRAM),
            ("sklearn.exceptions.NotFittedError: This estimator is not fitted yet.", ErrorKind.OTHER),
            ("RuntimeError: CUDA out of memory", ErrorKind.OTHER),
        ],
    )
    def test_traceback_kinds(self, last_line, kind):
        assert classify_error(failed(traceback(last_line))) is kind

    def test_timeout(self):
        assert classify_error(ExecutionResult(exit_code=-9, timed_out=True)) is ErrorKind.TIMEOUT

    def test_clean(self):
        assert classify_error(ExecutionResult(exit_code=0)) is ErrorKind.NONE

    def test_no_exception_line(self):
        assert classify_error(failed("")) is ErrorKind.OTHER

    def test_last_exception_wins(self):
        stderr = traceback("KeyError: 'a'") + "\nDuring handling of the above exception:\n" + traceback(
            "NameError: name 'b' is not defined"
        )
        assert classify_error(failed(stderr)) is ErrorKind.UNDEFINED_VARIABLE


class TestExecutionResult:
    """Test cases for log rendering."""

    def test_log_text_combines_streams(self):
        result = ExecutionResult(exit_code=1, stdout="epoch 1\n", stderr="boom\n")
        assert result.log_text() == "epoch 1\nboom"

    def test_log_text_timeout_line(self):
        result = ExecutionResult(exit_code=-9, stdout="epoch 1\n", timed_out=True)
        assert result.log_text().endswith("Execution timed out and was terminated.")

    def test_log_text_empty(self):
        assert ExecutionResult(exit_code=3).log_text() == "Process exited with code 3 and no output."

    def test_log_text_keeps_tail(self):
        result = ExecutionResult(exit_code=1, stderr="x" * 50 + "END")
        assert result.log_text(max_chars=10) == "...\n" + ("x" * 7) + "END"

    def test_failure_is_synthetic(self):
        result = ExecutionResult.failure("no code block")
        assert result.synthetic is True
        assert detect_error(result) is True
        assert result.error_kind is ErrorKind.OTHER
