"""Macros for the mkdocs site (mkdocs-macros looks for `define_env` here)."""
import sys
import pathlib

THIS_FILE_DIR = pathlib.Path(__file__).parent.absolute()
sys.path.insert(0, THIS_FILE_DIR.as_posix())

from nltlab import VERSION
from nltlab.config import SCHEMA_VERSION
from nltlab.experiment import ExitCode


def define_env(env):
    "Hook function for mkdocs"

    @env.macro
    def get_version():
        return VERSION

    @env.macro
    def schema_version():
        return SCHEMA_VERSION

    @env.macro
    def exit_codes():
        """Markdown table of the command line exit codes."""
        rows = ["| Code | Meaning |", "|---|---|"]
        for code in ExitCode:
            rows.append(f"| {int(code)} | {code.name.lower().replace('_', ' ')} |")
        return "\n".join(rows)
