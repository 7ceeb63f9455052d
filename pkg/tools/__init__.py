"""Infrastructure helpers: artifact files, random streams and worker pools."""
from .files_tool import FileTool
from .rng_tool import substream, block_layout, Block
from .pool_tool import map_blocks

__all__ = ['FileTool', 'substream', 'block_layout', 'Block', 'map_blocks']
