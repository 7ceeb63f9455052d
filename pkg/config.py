"""Configuration settings for the application."""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Worker pool size for path simulation (output never depends on it)
WORKERS = int(os.getenv("HEATLAB_WORKERS", "1"))

# Output locations
LOG_DIR = os.getenv("HEATLAB_LOG_DIR", "logs")
ARTIFACT_DIR = os.getenv("HEATLAB_ARTIFACT_DIR", "artifacts")

# Simulated cells (paths x steps) per block; fixes the path-to-substream layout
BLOCK_CELLS = int(os.getenv("HEATLAB_BLOCK_CELLS", str(2 ** 20)))

DEFAULT_SEED = int(os.getenv("HEATLAB_DEFAULT_SEED", "20240601"))

if WORKERS < 1:
    raise ValueError("HEATLAB_WORKERS must be a positive integer")
if BLOCK_CELLS < 1:
    raise ValueError("HEATLAB_BLOCK_CELLS must be a positive integer")
