from langgraph.graph import StateGraph, END, START

from ..bench.report import emit_report
from ..bench.runner import run_grid
from ..bench.summary import SummaryRow, summarize
from ..states.experiment import RunState
from ..utils.logging import get_logger

logger = get_logger("graphs.workflow")


def create_run_workflow(show_progress: bool = True):
    """
    The `ittt run` pipeline: run_seeds -> summarize -> emit_report.

    The compiled graph takes a RunState holding `config` (an
    ExperimentConfig) and optionally `weights`; it returns the state with
    records, studies, summary rows and the written file paths.
    """

    def run_seeds_node(state: RunState):
        result = run_grid(state["config"], show_progress=show_progress, weights=state.get("weights"))
        return {
            "records": result.records,
            "studies": result.studies,
            "aborted_cells": result.aborted_cells,
            "last_action": "seeds_completed"
        }

    def summarize_node(state: RunState):
        rows = summarize(state.get("records", []))
        return {"summary": [row.to_dict() for row in rows], "last_action": "summarized"}

    def emit_report_node(state: RunState):
        cfg = state["config"]
        rows = [SummaryRow(**row) for row in state.get("summary", [])]
        files = emit_report(
            rows,
            state.get("records", []),
            cfg.output_path,
            studies=state.get("studies") if cfg.studies else None
        )
        logger.info(f"Report written to {cfg.output_path}")
        return {"files": files, "last_action": "report_emitted"}

    workflow = StateGraph(RunState)

    workflow.add_node("run_seeds", run_seeds_node)
    workflow.add_node("summarize", summarize_node)
    workflow.add_node("emit_report", emit_report_node)

    workflow.add_edge(START, "run_seeds")
    workflow.add_edge("run_seeds", "summarize")
    workflow.add_edge("summarize", "emit_report")
    workflow.add_edge("emit_report", END)

    return workflow.compile()
