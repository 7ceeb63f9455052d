import json
import csv
import io
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

M = TypeVar("M", bound=BaseModel)

METADATA_PREFIX = "# "


class FileTool:
    """
    Writes and reads experiment artifacts: CSV tables and JSON documents,
    each carrying a metadata header block.
    """

    def __init__(self, base_dir: Union[str, Path] = "artifacts"):
        """Initialize with base directory for relative artifact paths."""
        self.base_dir = Path(base_dir)

    def save_csv(
        self,
        data: List[Dict[str, Any]],
        filename: Union[str, Path],
        metadata: Optional[Dict[str, Any]] = None,
        columns: Optional[List[str]] = None
    ) -> Path:
        """
        Save rows to a CSV file preceded by '# key: value' metadata lines.

        Args:
            data: List of row dictionaries
            filename: Output path; relative paths land under base_dir
            metadata: Header block written before the column names
            columns: Column order (defaults to the first row's keys)

        Returns:
            Path to the saved file
        """
        if not data:
            raise ValueError("No data provided to save")

        filepath = self.get_filepath(filename)
        df = pd.DataFrame(data, columns=columns)
        body = df.to_csv(index=False, quoting=csv.QUOTE_NONNUMERIC, lineterminator='\n')

        with open(filepath, 'w', encoding='utf-8', newline='') as f:
            for key in sorted(metadata or {}):
                f.write(f"{METADATA_PREFIX}{key}: {metadata[key]}\n")
            f.write(body)

        return filepath

    def load_csv(self, filepath: Union[str, Path]) -> Tuple[Dict[str, str], pd.DataFrame]:
        """Read a CSV written by save_csv, returning (metadata, table)."""
        path = self._existing(filepath, "CSV")
        metadata: Dict[str, str] = {}
        body_lines = []
        with open(path, 'r', encoding='utf-8') as f:
            for line in f:
                if line.startswith(METADATA_PREFIX) and not body_lines:
                    key, _, value = line[len(METADATA_PREFIX):].partition(':')
                    metadata[key.strip()] = value.strip()
                else:
                    body_lines.append(line)
        df = pd.read_csv(io.StringIO(''.join(body_lines)))
        return metadata, df

    def load_json(self, filepath: Union[str, Path], model: Optional[Type[M]] = None) -> Any:
        """
        Read a JSON document.

        With a pydantic model the payload is validated into it; a
        {"metadata", "data"} envelope written by save_json is unwrapped first.
        """
        path = self._existing(filepath, "JSON")
        document = json.loads(path.read_text(encoding='utf-8'))
        if model is None:
            return document
        if isinstance(document, dict) and set(document) == {"metadata", "data"}:
            document = document["data"]
        return model.parse_obj(document)

    def save_json(
        self,
        data: Any,
        filename: Union[str, Path],
        metadata: Optional[Dict[str, Any]] = None,
        indent: int = 2
    ) -> Path:
        """
        Save data as sorted, indented JSON. With metadata the document becomes
        {"metadata": ..., "data": ...}.
        """
        path = self.get_filepath(filename)
        payload = data.dict() if isinstance(data, BaseModel) else data
        if metadata is not None:
            payload = {"metadata": metadata, "data": payload}
        text = json.dumps(payload, indent=indent, ensure_ascii=False, sort_keys=True, default=_to_builtin)
        path.write_text(text + '\n', encoding='utf-8')
        return path

    def get_filepath(self, filename: Union[str, Path], ensure_parent: bool = True) -> Path:
        """Resolve filename against base_dir, creating the parent directory."""
        path = self.base_dir / Path(filename)
        if ensure_parent:
            path.parent.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def _existing(filepath: Union[str, Path], kind: str) -> Path:
        path = Path(filepath)
        if not path.exists():
            raise FileNotFoundError(f"{kind} file not found: {path}")
        return path


def _to_builtin(obj: Any) -> Any:
    """json default hook for numpy scalars and arrays, pydantic models and paths."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, BaseModel):
        return obj.dict()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Type {type(obj)} not serializable")
