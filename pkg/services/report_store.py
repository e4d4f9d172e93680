"""
Report Store for Verification Runs
Writes run documents as sorted JSON and summarizes what is on disk
"""

import json
import os
from typing import Any, Dict, Iterable, List, Optional

from config import get_config
from models.reports import VerificationReport, to_plain
from utils.logger import get_logger

logger = get_logger(__name__)


class ReportStore:
    """
    Stores one JSON document per run:
    1. `schema_version` and the subcommand
    2. the run configuration
    3. one record per verifier run, in matrix order
    4. a pass/fail summary

    No wall-clock fields are written, so identical configs give identical files.
    """

    def __init__(self, report_dir: Optional[str] = None):
        self.config = get_config()
        self.report_dir = report_dir or self.config.REPORT_DIR

    def _get_report_path(self, name: str) -> str:
        """Get the full path for a named report"""
        if name.endswith('.json') or os.sep in name:
            return name
        return os.path.join(self.report_dir, f"{name}.json")

    def build_document(self, subcommand: str, run_config: Dict[str, Any],
                       records: Iterable[VerificationReport],
                       failures: Optional[List[Dict[str, Any]]] = None) -> Dict[str, Any]:
        """
        Assemble a run document

        Args:
            subcommand: CLI subcommand that produced the records
            run_config: the validated run configuration
            records: verifier reports in matrix order
            failures: verifier runs that raised, as {'name', 'error', 'details'}

        Returns:
            JSON-ready document
        """
        records = [record.to_dict() for record in records]
        failures = failures or []
        passed = sum(1 for record in records if record['verdict'] == 'pass')
        return to_plain({
            'schema_version': self.config.REPORT_SCHEMA_VERSION,
            'subcommand': subcommand,
            'config': run_config,
            'records': records,
            'errors': failures,
            'summary': {
                'total': len(records) + len(failures),
                'passed': passed,
                'failed': len(records) - passed + len(failures),
            },
        })

    def dumps(self, document: Dict[str, Any]) -> str:
        return json.dumps(document, indent=2, ensure_ascii=False, sort_keys=True) + '\n'

    def save_report(self, name: str, document: Dict[str, Any]) -> Optional[str]:
        """
        Write a document to REPORT_DIR/<name>.json, or to `name` itself when it is a path

        Returns:
            Path written, or None if writing failed
        """
        path = self._get_report_path(name)
        directory = os.path.dirname(path)
        try:
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                f.write(self.dumps(document))
            summary = document.get('summary', {})
            logger.info(f"Report saved to {path} - {summary.get('passed', 0)}/{summary.get('total', 0)} passed")
            return path
        except OSError as e:
            logger.error(f"Error saving report {path}: {e}")
            return None

    def load_report(self, name: str) -> Optional[Dict[str, Any]]:
        """Read a stored document; None if it is missing or unreadable"""
        path = self._get_report_path(name)
        if not os.path.exists(path):
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, ValueError) as e:
            logger.error(f"Error reading report {path}: {e}")
            return None

    def clear_reports(self, name: Optional[str] = None) -> int:
        """
        Remove stored reports
        If name is None, clears every JSON file in REPORT_DIR
        """
        if name:
            path = self._get_report_path(name)
            if os.path.exists(path):
                os.remove(path)
                logger.info(f"Cleared report {path}")
                return 1
            return 0
        if not os.path.isdir(self.report_dir):
            return 0
        removed = 0
        for filename in sorted(os.listdir(self.report_dir)):
            if filename.endswith('.json'):
                os.remove(os.path.join(self.report_dir, filename))
                removed += 1
        logger.info(f"Cleared {removed} report files")
        return removed

    def get_report_stats(self) -> Dict[str, Any]:
        """
        Get statistics about stored reports
        """
        stats = {
            'report_files': 0,
            'total_records': 0,
            'passed_records': 0,
            'failed_records': 0,
            'report_details': []
        }

        if not os.path.isdir(self.report_dir):
            return stats

        for filename in sorted(os.listdir(self.report_dir)):
            if not filename.endswith('.json'):
                continue
            stats['report_files'] += 1
            document = self.load_report(os.path.join(self.report_dir, filename))
            if document is None:
                continue
            summary = document.get('summary', {})
            stats['total_records'] += summary.get('total', 0)
            stats['passed_records'] += summary.get('passed', 0)
            stats['failed_records'] += summary.get('failed', 0)
            stats['report_details'].append({
                'file': filename,
                'subcommand': document.get('subcommand', 'unknown'),
                'schema_version': document.get('schema_version', 'unknown'),
                'records': summary.get('total', 0),
                'failed': summary.get('failed', 0),
            })

        return stats
