"""Deterministic placeholder screenshots and the content-addressed store.

The simulator has no visual layout engine; it renders each page state as a
plain raster of labelled element boxes so downstream consumers (oracle
requests, SFT export) have real image bytes to reference.  Rendering the
same page state always yields the same PNG bytes, so handles double as
content hashes and full pipeline runs stay byte-reproducible.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from PIL import Image, ImageDraw

from .errors import MissingScreenshot

CANVAS = (640, 480)


def render_page(title: str, rows: list[tuple[str, str, tuple[int, int, int, int]]]) -> bytes:
    """Render a page as PNG bytes.

    ``rows`` holds (role, text, region) per visible element, already laid
    out by the simulator.
    """
    image = Image.new("RGB", CANVAS, "white")
    draw = ImageDraw.Draw(image)
    draw.rectangle((0, 0, CANVAS[0] - 1, 24), fill=(40, 40, 80))
    draw.text((8, 6), title, fill="white")
    for index, (role, text, region) in enumerate(rows):
        x, y, w, h = region
        draw.rectangle((x, y, x + w, y + h), outline=(200, 60, 60))
        draw.text((x + 4, y + 4), f"{index + 1}. [{role}] {text}", fill="black")
    import io

    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


def handle_for(png_bytes: bytes) -> str:
    return hashlib.sha256(png_bytes).hexdigest()[:20]


class ScreenshotStore:
    """Directory of PNG files named by content hash."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, handle: str) -> Path:
        return self.directory / f"{handle}.png"

    def put(self, png_bytes: bytes) -> str:
        handle = handle_for(png_bytes)
        path = self.path_for(handle)
        if not path.exists():
            path.write_bytes(png_bytes)
        return handle

    def get(self, handle: str) -> bytes:
        path = self.path_for(handle)
        if not path.exists():
            raise MissingScreenshot(f"no stored image for handle {handle!r}")
        return path.read_bytes()

    def has(self, handle: str) -> bool:
        return self.path_for(handle).exists()
