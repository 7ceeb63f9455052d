from typing import Any, Callable, Dict, Literal
import logging
import traceback

from langgraph.graph import StateGraph, END
from .state import CriterionResult, SuiteState
from .nodes.criteria import CRITERIA, FAST_ORDER, FULL_EXTRA

logger = logging.getLogger(__name__)


class SuiteGraphBuilder:
    """
    Validation suite as a graph: one node per criterion, run in sequence.

    The fast criteria always run; after the last of them a conditional edge
    continues into the Monte Carlo-heavy criteria when the suite is 'full'.
    """

    def __init__(self):
        self.graph = StateGraph(SuiteState)
        self._setup_nodes()
        self._setup_edges()
        self._compiled = None

    def _setup_nodes(self):
        """Register one node per criterion."""
        for cid in FAST_ORDER + FULL_EXTRA:
            self.graph.add_node(cid.lower(), self._wrap(cid, CRITERIA[cid]))

    def _setup_edges(self):
        """Chain the fast criteria, then branch on the suite name."""
        fast = [cid.lower() for cid in FAST_ORDER]
        extra = [cid.lower() for cid in FULL_EXTRA]
        for earlier, later in zip(fast, fast[1:]):
            self.graph.add_edge(earlier, later)

        self.graph.add_conditional_edges(
            fast[-1],
            self._should_run_full,
            {
                "full": extra[0],
                "done": END
            }
        )
        for earlier, later in zip(extra, extra[1:]):
            self.graph.add_edge(earlier, later)
        self.graph.add_edge(extra[-1], END)

        self.graph.set_entry_point(fast[0])

    def compile(self):
        """Compile the graph for execution."""
        if not self._compiled:
            self._compiled = self.graph.compile()
        return self._compiled

    def _wrap(self, cid: str, check: Callable[[Dict[str, Any]], CriterionResult]):
        async def node(state: SuiteState) -> Dict[str, Any]:
            budgets = state.get("budgets") or {}
            try:
                result = check(budgets)
            except Exception as e:
                logger.error(f"{cid} raised: {e}", exc_info=True)
                result = CriterionResult(
                    id=cid, passed=False,
                    error=f"{type(e).__name__}: {e}",
                    detail=traceback.format_exc(limit=3),
                )
            return {"results": list(state.get("results") or []) + [result.dict()]}
        node.__name__ = f"check_{cid.lower()}"
        return node

    def _should_run_full(self, state: SuiteState) -> Literal["full", "done"]:
        return "full" if state.get("suite") == "full" else "done"


suite_builder = SuiteGraphBuilder()
suite_graph = suite_builder.compile()
