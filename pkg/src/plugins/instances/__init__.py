from .grid import QUEEN, ROOK, GridSpec, grid, make_grid, make_path, quadrant_plan, quadrant_zones, stripe_plan
from .instance_file import (
    DATA_DIR,
    LoadedInstance,
    instance_hash,
    load_instance,
    resolve_instance_path,
    save_instance,
)
from .metadata import RunMetadata, parse_header_lines
from .plan_file import load_plan, load_plan_with_metadata, read_plan_metadata, save_plan

__all__ = [
    "QUEEN",
    "ROOK",
    "GridSpec",
    "grid",
    "make_grid",
    "make_path",
    "quadrant_plan",
    "quadrant_zones",
    "stripe_plan",
    "DATA_DIR",
    "LoadedInstance",
    "instance_hash",
    "load_instance",
    "resolve_instance_path",
    "save_instance",
    "RunMetadata",
    "parse_header_lines",
    "load_plan",
    "load_plan_with_metadata",
    "read_plan_metadata",
    "save_plan",
]
