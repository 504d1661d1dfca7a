"""
Report Writer Module
Writes experiment tables as CSV / JSON / XLSX with provenance headers and a run manifest
"""
import json
import logging
import platform
from datetime import datetime
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import pandas as pd

from .errors import ValidationError

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json', 'xlsx')
TRACKED_PACKAGES = ('numpy', 'scipy', 'sympy', 'pandas', 'openpyxl')


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    if hasattr(value, 'item'):
        return value.item()
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


class ReportWriter:
    """Writes tables and payloads with the experiment header"""

    def __init__(self, config):
        self.config = config
        self.float_digits = config.get('float_digits', 12)
        self.written = []

    def header(self, command, tag, parameters, seed):
        """Provenance header: command, quantity tag, parameters, seed, timestamp"""
        return {
            'command': command,
            'quantity': tag,
            'parameters': parameters,
            'seed': seed,
            'generated': datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
        }

    def write_table(self, df, output_file, header, fmt='csv'):
        """Save a DataFrame in the requested format"""
        if fmt not in FORMATS:
            raise ValidationError(f"Unknown output format '{fmt}' (expected one of {FORMATS})")
        output_file = Path(output_file)
        output_file.parent.mkdir(parents=True, exist_ok=True)

        if fmt == 'csv':
            with open(output_file, 'w', encoding='utf-8', newline='') as f:
                for key, value in header.items():
                    f.write(f"# {key}: {json.dumps(value, default=_jsonable, sort_keys=True)}\n")
                df.to_csv(f, index=False, float_format=f'%.{self.float_digits}g')
        elif fmt == 'json':
            payload = {'header': header, 'rows': df.to_dict(orient='records')}
            with open(output_file, 'w', encoding='utf-8') as f:
                json.dump(payload, f, indent=2, default=_jsonable)
        else:
            meta = pd.DataFrame(
                [{'key': k, 'value': json.dumps(v, default=_jsonable)} for k, v in header.items()]
            )
            with pd.ExcelWriter(output_file, engine='openpyxl') as writer:
                df.to_excel(writer, sheet_name='data', index=False)
                meta.to_excel(writer, sheet_name='header', index=False)

        self.written.append(output_file)
        logger.info(f"✅ Saved {len(df)} rows → {output_file.name}")
        return output_file

    def write_json(self, payload, output_file, header):
        """Save a single result object"""
        output_file = Path(output_file)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, 'w', encoding='utf-8') as f:
            json.dump({'header': header, 'result': payload}, f, indent=2, default=_jsonable)
        self.written.append(output_file)
        logger.info(f"✅ Saved result → {output_file.name}")
        return output_file

    def write_manifest(self, output_file, config, wall_time):
        """Inputs, package versions and wall time of a run"""
        versions = {}
        for package in TRACKED_PACKAGES:
            try:
                versions[package] = metadata.version(package)
            except metadata.PackageNotFoundError:
                versions[package] = None
        manifest = {
            'config': config,
            'python': platform.python_version(),
            'versions': versions,
            'wall_time_seconds': round(wall_time, 3),
            'outputs': [str(p) for p in self.written],
            'generated': datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
        }
        output_file = Path(output_file)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, 'w', encoding='utf-8') as f:
            json.dump(manifest, f, indent=2, default=_jsonable)
        logger.info(f"   Manifest saved to {output_file.name}")
        return output_file


def read_table(path):
    """Load a CSV written by ReportWriter, skipping the header lines"""
    return pd.read_csv(path, comment='#')
