import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from src.errors import ImageError
from src.memsys.memory import DEFAULT_SIZE, DataMemory, InstMemory

logger = logging.getLogger("rvsim.memsys.image")

FORMATS = ("bin", "hex")
_HEX_WORD = re.compile(r"^[0-9a-fA-F]{8}$")


@dataclass(frozen=True)
class MemoryImage:
    payload: bytes
    origin: int = 0
    source: str = "<memory>"

    def to_dict(self) -> Dict[str, Any]:
        return {"source": self.source, "origin": self.origin, "bytes": len(self.payload)}


def detect_format(path: str) -> str:
    return "hex" if Path(path).suffix.lower() == ".hex" else "bin"


def parse_hex_words(text: str, source: str = "<memory>") -> bytes:
    """One 8-hex-digit word per line; word n lands at byte address 4n. Blank lines are skipped."""
    out = bytearray()
    for lineno, line in enumerate(text.splitlines(), start=1):
        token = line.strip()
        if not token:
            continue
        if not _HEX_WORD.match(token):
            raise ImageError(
                f"malformed hex word at line {lineno}: {token!r}",
                "E_HEX_LINE",
                {"source": source, "line": lineno}
            )
        out += int(token, 16).to_bytes(4, "little")
    return bytes(out)


def to_hex_words(payload: bytes) -> str:
    padded = payload + b"\x00" * (-len(payload) % 4)
    words = [int.from_bytes(padded[i:i + 4], "little") for i in range(0, len(padded), 4)]
    return "".join(f"{w:08x}\n" for w in words)


def load_image(path: str, fmt: Optional[str] = None) -> MemoryImage:
    """Read a flat binary or hex-words file."""
    fmt = fmt or detect_format(path)
    if fmt not in FORMATS:
        raise ImageError(f"unknown image format {fmt!r}", "E_IMAGE_FORMAT", {"format": fmt})
    file = Path(path)
    if not file.is_file():
        raise ImageError(f"file not found: {path}", "E_FILE_NOT_FOUND", {"path": str(path)})
    try:
        if fmt == "hex":
            payload = parse_hex_words(file.read_text(), source=str(path))
        else:
            payload = file.read_bytes()
    except (OSError, UnicodeDecodeError) as e:
        raise ImageError(f"cannot read {path}: {e}", "E_IMAGE_READ", {"path": str(path)})
    logger.debug(f"loaded {len(payload)} bytes from {path} ({fmt})")
    return MemoryImage(payload=payload, source=str(path))


def build_memories(image: MemoryImage, imem_bytes: int = DEFAULT_SIZE, dmem_bytes: int = DEFAULT_SIZE,
                   console=None) -> Tuple[InstMemory, DataMemory]:
    """Harvard mirror: the same image initializes both memories."""
    capacity = min(imem_bytes, dmem_bytes)
    if image.origin + len(image.payload) > capacity:
        raise ImageError(
            f"image of {len(image.payload)} bytes exceeds memory capacity of {capacity} bytes",
            "E_IMAGE_TOO_LARGE",
            {"source": image.source, "image_bytes": len(image.payload), "capacity": capacity}
        )
    imem = InstMemory(imem_bytes)
    dmem = DataMemory(dmem_bytes, console=console)
    imem.load(image.payload, image.origin)
    dmem.load(image.payload, image.origin)
    return imem, dmem
