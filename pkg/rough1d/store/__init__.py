from .artifacts import (
    Report,
    emit_report,
    read_area_csv,
    read_path_csv,
    write_path_csv,
    write_text_atomic,
)
from .config import apply_environment, ensure_default_config_file, load_config
from .paths import get_config_path, get_data_dir, get_run_logs_dir, run_log_path
from .run_log import RunLogger

__all__ = [
    "Report",
    "emit_report",
    "read_area_csv",
    "read_path_csv",
    "write_path_csv",
    "write_text_atomic",
    "apply_environment",
    "ensure_default_config_file",
    "load_config",
    "get_config_path",
    "get_data_dir",
    "get_run_logs_dir",
    "run_log_path",
    "RunLogger",
]
