import base64
import re
import xml.etree.ElementTree as ET
import zlib

import numpy as np

from geodib import plots


def test_scatter_is_valid_svg(tmp_path):
    pts = np.random.default_rng(0).normal(size=(30, 2))
    path = tmp_path / "s.svg"
    plots.scatter_svg(pts, np.arange(30) % 3, path, title="a < b & c",
                      boundaries={"line": [np.array([[0.0, -1.0], [0.0, 1.0]])], "none": []})
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    assert len(root.findall("{http://www.w3.org/2000/svg}circle")) == 30
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 1


def test_line_panels_handle_nan(tmp_path):
    path = tmp_path / "l.svg"
    plots.line_panels_svg([{"title": "t", "series": {"a": ([1, 2, 3], [0.1, float("nan"), 0.3])}},
                           {"series": {"b": ([], [])}}], path)
    ET.parse(path)


def test_heatmap_embeds_png(tmp_path):
    m = np.arange(12, dtype=float).reshape(3, 4)
    path = tmp_path / "h.svg"
    plots.heatmap_svg(m, path)
    text = path.read_text()
    ET.fromstring(text)
    data = base64.b64decode(re.search(r"base64,([A-Za-z0-9+/=]+)", text).group(1))
    assert data.startswith(b"\x89PNG")
    # IDAT payload decodes to 3 filtered rows of 4 grey bytes
    idat = data[data.index(b"IDAT") + 4:data.index(b"IEND") - 8]
    raw = zlib.decompress(idat)
    assert len(raw) == 3 * (1 + 4)
    assert raw[1] == 255 and raw[-1] == 0


def test_render_deterministic():
    a = plots.scatter_svg(np.eye(2), [0, 1]).render()
    b = plots.scatter_svg(np.eye(2), [0, 1]).render()
    assert a == b
