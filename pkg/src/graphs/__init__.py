from .workflow import create_run_workflow

__all__ = ["create_run_workflow"]
