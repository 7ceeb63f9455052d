from typing import Any, Dict, Optional
from pathlib import Path
import asyncio
import logging
import time

from .state import ARTIFACT_VERSION, CriterionResult, DomainError, SuiteState
from .build import suite_graph
from .nodes.criteria import SUITE_BUDGETS
from tools import FileTool

logger = logging.getLogger(__name__)


async def run_suite_async(suite: str, budgets: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Run the validation graph and collect a report.

    Args:
        suite: 'fast' or 'full'
        budgets: Overrides merged into the suite's default budget

    Returns:
        Dict with suite, passed, criteria (list of CriterionResult dicts) and runtime
    """
    if suite not in SUITE_BUDGETS:
        raise DomainError(f"Unknown suite '{suite}', expected one of {sorted(SUITE_BUDGETS)}")
    merged = {**SUITE_BUDGETS[suite], **(budgets or {})}
    initial: SuiteState = {"suite": suite, "budgets": merged, "results": [], "error": None}

    start = time.time()
    final = await suite_graph.ainvoke(initial)
    results = [CriterionResult(**r) for r in final.get("results", [])]
    report = {
        "suite": suite,
        "artifact_version": ARTIFACT_VERSION,
        "passed": bool(results) and all(r.passed for r in results),
        "runtime_s": round(time.time() - start, 3),
        "criteria": [r.dict() for r in results],
    }
    failed = [r.id for r in results if not r.passed]
    if failed:
        logger.warning(f"Suite '{suite}' failed: {', '.join(failed)}")
    else:
        logger.info(f"Suite '{suite}' passed {len(results)} criteria in {report['runtime_s']:.1f}s")
    return report


def run_suite(
    suite: str = "fast",
    report_path: Optional[str] = None,
    budgets: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Synchronous entry point; writes the report as JSON when report_path is set."""
    report = asyncio.run(run_suite_async(suite, budgets))
    if report_path:
        path = Path(report_path)
        FileTool(base_dir=str(path.parent or ".")).save_json(
            report, path.name, metadata={"suite": suite, "artifact_version": ARTIFACT_VERSION}
        )
        logger.info(f"Wrote report to {path}")
    return report


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    outcome = run_suite("fast")
    for row in outcome["criteria"]:
        print(f"{row['id']:>4}  {'pass' if row['passed'] else 'FAIL'}  {row['description']}")
