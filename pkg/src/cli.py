from typing import List, Optional, Sequence

from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.theme import Theme

from .bench.checks import CheckResult
from .bench.report import method_label
from .bench.summary import SummaryRow
from .states.records import StudyRecord

custom_theme = Theme({
    "info": "cyan",
    "warning": "yellow",
    "error": "bold red",
    "success": "bold green",
    "command": "bold blue",
})


def _fmt(value: Optional[float], digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}g}"


class LabConsole:
    """Human-facing output of the `ittt` commands."""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console(theme=custom_theme)

    def print_header(self, command: str, detail: str = ""):
        self.console.print(f"\n[bold cyan]ittt {command}[/bold cyan] {detail}\n")

    def print_info(self, message: str):
        self.console.print(f"[info]ℹ[/info] {message}")

    def print_success(self, message: str):
        self.console.print(f"[success]✓[/success] {message}")

    def print_warning(self, message: str):
        self.console.print(f"[warning]⚠[/warning] {message}")

    def print_error(self, message: str):
        self.console.print(f"[error]✗[/error] {message}")

    def progress(self, description: str):
        """Indeterminate spinner for a long step; use as a context manager."""
        progress = Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        )
        progress.add_task(description, total=None)
        return progress

    def print_summary(self, rows: Sequence[SummaryRow]):
        multiple = len({row.batch_size for row in rows}) > 1
        table = Table(title="Task error by method and level")
        for header in ("method", "level", "severity", "n", "mean_error", "std_error", "mean_idem", "overhead"):
            table.add_column(header, style="cyan" if header == "method" else None, justify="left" if header == "method" else "right")
        for row in rows:
            table.add_row(
                method_label(row, multiple),
                str(row.level),
                _fmt(row.severity, 3),
                str(row.count),
                _fmt(row.mean_error),
                _fmt(row.std_error),
                _fmt(row.mean_idem),
                _fmt(row.overhead, 3),
            )
        self.console.print(table)

    def print_studies(self, studies: Sequence[StudyRecord]):
        if not studies:
            return
        table = Table(title="Studies")
        table.add_column("study", style="cyan")
        table.add_column("seed", justify="right")
        table.add_column("result")
        table.add_column("metrics")
        for study in studies:
            verdict = "-" if study.passed is None else ("[success]pass[/success]" if study.passed else "[warning]miss[/warning]")
            metrics = ", ".join(f"{k}={_fmt(v)}" for k, v in list(study.metrics.items())[:4])
            table.add_row(study.study, str(study.seed), verdict, metrics)
        self.console.print(table)

    def print_checks(self, results: List[CheckResult]):
        table = Table(title="Self-checks")
        table.add_column("check", style="cyan")
        table.add_column("max error", justify="right")
        table.add_column("result")
        table.add_column("detail")
        for result in results:
            verdict = "[success]pass[/success]" if result.passed else "[error]FAIL[/error]"
            table.add_row(result.name, f"{result.max_error:.2e}", verdict, result.detail)
        self.console.print(table)
