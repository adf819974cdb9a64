import json
import logging

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('confhor.verify')

from lib.report import to_jsonable
from lib.verification import run_suite


def cmd_verify(suite, out=None, threads=None):
    """Run a verify suite, print one line per check; 0 when every check passes, 1 otherwise."""
    results = run_suite(suite, threads)
    for check in results:
        print(check.line())
    failed = [check for check in results if not check.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            json.dump(to_jsonable(results), handle, indent=2, ensure_ascii=False)
            handle.write("\n")
    if failed:
        logger.warning(f"{len(failed)} checks failed: {', '.join(c.suite + '/' + c.name for c in failed)}")
        return 1
    return 0
