"""Panel renderer for peer-effects Monte Carlo summary tables."""

__version__ = "0.1.0"

from .render import (
    EmptyInput,
    PanelSpec,
    SchemaMismatch,
    build_structure,
    read_summary,
    render,
)
