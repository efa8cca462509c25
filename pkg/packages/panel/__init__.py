"""
Panel ingestion, balance checks and the two-way within transformation
"""

from packages.panel.data import PanelData
from packages.panel.loader import PanelSchema, load_panel, panel_from_frame, write_panel
from packages.panel.scaling import scale_variables
from packages.panel.stacking import stack, unstack
from packages.panel.validation import validate_panel
from packages.panel.within import demean_time, demean_two_way, is_demeaned, within_transform

__all__ = [
    "PanelData",
    "PanelSchema",
    "load_panel",
    "panel_from_frame",
    "write_panel",
    "scale_variables",
    "stack",
    "unstack",
    "validate_panel",
    "demean_time",
    "demean_two_way",
    "is_demeaned",
    "within_transform",
]
