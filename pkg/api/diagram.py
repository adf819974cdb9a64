import logging

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('confhor.diagram')

from lib.errors import HypothesisViolated
from lib.exact_solutions import catalog
from lib.report import diagram_rows, write_diagram


def cmd_diagram(config, threads=None):
    """Write the horizon-diagram CSV for the configured metric."""
    entry = catalog(config.metric, **config.catalog_params())
    rows = diagram_rows(entry, config.grid, threads=threads or config.threads or None)
    if not rows:
        raise HypothesisViolated(f"{entry.name}: no horizon found on any of the {config.grid} grid rows")
    write_diagram(rows, config.diagram_out)
    logger.info(f"Diagram for {entry.name}: {len(rows)} rows in {config.diagram_out}")
    return rows
