"""The golden catalog of worked reductions."""

from .catalog import (
    AggregateReport,
    Catalog,
    CatalogEntry,
    CatalogError,
    EntryReport,
    RunOptions,
    list_entries,
    load_catalog,
    run_all,
    run_entry,
    sign_flipped,
)

__all__ = [
    "AggregateReport", "Catalog", "CatalogEntry", "CatalogError", "EntryReport", "RunOptions",
    "list_entries", "load_catalog", "run_all", "run_entry", "sign_flipped",
]
