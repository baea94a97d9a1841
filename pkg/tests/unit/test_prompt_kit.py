"""Unit tests for prompt templates and renderers."""
import pytest
from pydantic import ValidationError

from dsagent.prompt_kit import (
    TEMPLATE_NAMES,
    AdapterExample,
    PromptLibrary,
    PromptRenderError,
    fence_for,
    parse_template,
    render_adapter,
    render_debugger,
    render_logger,
    render_planner,
    render_programmer,
    render_revise_rank,
    render_solution_extractor,
)
from tests.fixtures.prompts import (
    BUGGY_SCRIPT,
    CASES,
    EXAMPLE_SCAFFOLD,
    EXAMPLE_SOLUTION,
    EXAMPLE_TASK,
    EXEC_LOG,
    PLAN,
    RUNNING_LOG,
    SCRIPT,
    TASK,
    golden,
)


class TestGoldenPrompts:
    """Rendered prompts match the stored goldens byte for byte."""

    def test_revise_rank(self):
        assert render_revise_rank(TASK, RUNNING_LOG, CASES) == golden("revise_rank_two_cases")

    def test_planner_with_case(self):
        assert render_planner(TASK, RUNNING_LOG, SCRIPT, CASES[0]) == golden("planner_with_case")

    def test_planner_without_case(self):
        """Retrieval disabled drops the case block entirely."""
        assert render_planner(TASK, RUNNING_LOG, SCRIPT, None) == golden("planner_without_case")

    def test_programmer(self):
        assert render_programmer(SCRIPT, PLAN) == golden("programmer")

    def test_debugger(self):
        assert render_debugger(SCRIPT, PLAN, BUGGY_SCRIPT, EXEC_LOG) == golden("debugger")

    def test_adapter_one_example(self):
        example = AdapterExample(task=EXAMPLE_TASK, scaffold=EXAMPLE_SCAFFOLD, solution=EXAMPLE_SOLUTION)
        assert render_adapter([example], TASK, SCRIPT) == golden("adapter_one_example")

    def test_adapter_zero_shot(self):
        assert render_adapter([], TASK, SCRIPT) == golden("adapter_zero_shot")


class TestRenderers:
    """Test cases for slot checks and prompt structure."""

    def test_revise_rank_numbers_every_case(self):
        cases = [f"case {i}" for i in range(5)]
        prompt = render_revise_rank(TASK, RUNNING_LOG, cases)
        for i in range(1, 6):
            assert f"[{i}] ```\ncase {i - 1}\n```" in prompt
        assert "Rank 5 cases above" in prompt

    def test_revise_rank_needs_cases(self):
        with pytest.raises(PromptRenderError):
            render_revise_rank(TASK, RUNNING_LOG, [])

    def test_planner_empty_case_rejected(self):
        with pytest.raises(PromptRenderError):
            render_planner(TASK, RUNNING_LOG, SCRIPT, "   ")

    def test_programmer_empty_plan_rejected(self):
        with pytest.raises(PromptRenderError):
            render_programmer(SCRIPT, "")

    def test_debugger_requests_reflection(self):
        prompt = render_debugger(SCRIPT, PLAN, BUGGY_SCRIPT, EXEC_LOG)
        assert prompt.index("```reflection") < prompt.rindex("```python")

    def test_logger_accepts_empty_diff(self):
        prompt = render_logger(PLAN, EXEC_LOG, "", RUNNING_LOG)
        assert "[Code Difference]:\n```\n\n```" in prompt
        assert prompt.endswith("Do not include additional information or suggestions.")

    def test_adapter_examples_precede_target(self):
        examples = [
            AdapterExample(task=f"Example task {i}", scaffold="pass", solution=f"print({i})") for i in range(3)
        ]
        prompt = render_adapter(examples, TASK, SCRIPT)
        assert prompt.count("[Solution] ```python") == 3
        assert prompt.rindex("Example task 2") < prompt.index(TASK)
        assert prompt.endswith("without additional modifications.")

    def test_adapter_example_validation(self):
        with pytest.raises(ValidationError):
            AdapterExample(task="", scaffold="pass", solution="pass")

    def test_adapter_needs_scaffold(self):
        with pytest.raises(PromptRenderError):
            render_adapter([], TASK, " ")

    def test_solution_extractor(self):
        prompt = render_solution_extractor("model.fit(X, y)")
        assert "(6) What other important tricks" in prompt
        assert prompt.endswith("```python\nmodel.fit(X, y)\n```")

    def test_solution_extractor_fence_outgrows_code(self):
        code = 'doc = """\n```python\nx\n```\n"""'
        prompt = render_solution_extractor(code)
        assert prompt.endswith(f"````python\n{code}\n````")


class TestFenceFor:
    def test_plain_code(self):
        assert fence_for("print(1)") == "```"

    def test_longer_than_inner_run(self):
        assert fence_for("a ````` b") == "``````"


class TestPromptLibrary:
    """Test cases for template loading."""

    def test_all_templates_load(self):
        library = PromptLibrary()
        templates = [library.get(name) for name in TEMPLATE_NAMES]
        assert [t.name for t in templates] == list(TEMPLATE_NAMES)
        assert all(t.description for t in templates)

    def test_required_slots_from_front_matter(self):
        assert PromptLibrary().get("programmer").required_slots == ("script", "plan")

    def test_missing_slot(self):
        with pytest.raises(PromptRenderError, match="missing slots"):
            PromptLibrary().render("programmer", script="x = 1")

    def test_unknown_template(self):
        with pytest.raises(PromptRenderError):
            PromptLibrary().get("nonexistent")


class TestParseTemplate:
    def test_front_matter(self):
        metadata, body = parse_template("---\nname: t\nrequires: [a]\n---\nHello {{ a }}\n")
        assert metadata == {"name": "t", "requires": ["a"]}
        assert body == "Hello {{ a }}\n"

    def test_no_front_matter(self):
        assert parse_template("Just text") == ({}, "Just text")

    def test_unterminated(self):
        with pytest.raises(ValueError):
            parse_template("---\nname: t\nbody")
