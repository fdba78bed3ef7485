"""
Chart script for a running API server.

Posts a small campaign to /campaign and writes one interactive Plotly HTML
page per chart (fractions, trivial fractions, decision times) plus an index.

Usage:
    python -m app.main            # in another terminal
    python campaign_charts.py
"""

import asyncio
import json
from pathlib import Path

import httpx

BASE_URL = "http://localhost:8000"
OUTPUT_DIR = Path("charts_output")

CAMPAIGN = {
    "depth": 1,
    "boxes": 1,
    "vars": 3,
    "clause_size": 3,
    "prop_prob": 0.5,
    "method": "new",
    "l_values": list(range(3, 61, 3)),
    "samples": 20,
    "timeout": 2.0,
    "seed": 1,
}

TITLES = {
    "fractions": "Satisfiable and Unsatisfiable Fractions",
    "trivial": "Trivially Decided Fractions",
    "times": "Decision Time Percentiles",
}


def create_html_chart(chart: dict, title: str, filename: str) -> Path:
    """Write an HTML page rendering ``chart`` with Plotly."""
    html = f"""<!DOCTYPE html>
<html>
<head>
    <meta charset="utf-8">
    <title>{title}</title>
    <script src="https://cdn.plot.ly/plotly-2.27.0.min.js"></script>
    <style>
        body {{ font-family: sans-serif; margin: 0; padding: 20px; background-color: #f5f5f5; }}
        .container {{ max-width: 1200px; margin: 0 auto; background: white; padding: 30px; border-radius: 10px; }}
        #chart {{ width: 100%; height: 600px; }}
    </style>
</head>
<body>
    <div class="container">
        <h1>{title}</h1>
        <p>d={CAMPAIGN['depth']}, m={CAMPAIGN['boxes']}, N={CAMPAIGN['vars']}, C={CAMPAIGN['clause_size']},
           p={CAMPAIGN['prop_prob']} ({CAMPAIGN['method']} method), {CAMPAIGN['samples']} formulas per point</p>
        <div id="chart"></div>
    </div>
    <script>
        var data = {json.dumps(chart.get('data', []))};
        var layout = {json.dumps(chart.get('layout', {}))};
        layout.autosize = true;
        Plotly.newPlot('chart', data, layout, {{responsive: true}});
    </script>
</body>
</html>"""
    path = OUTPUT_DIR / filename
    path.write_text(html, encoding="utf-8")
    print(f"   Saved: {path}")
    return path


def create_index_html(pages: list) -> Path:
    links = "\n".join(f'<li><a href="{page["file"]}">{page["title"]}</a></li>' for page in pages)
    path = OUTPUT_DIR / "index.html"
    path.write_text(
        f"<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Campaign charts</title></head>"
        f"<body><h1>Campaign charts</h1><ul>{links}</ul></body></html>\n",
        encoding="utf-8",
    )
    return path


async def main():
    OUTPUT_DIR.mkdir(exist_ok=True)

    async with httpx.AsyncClient(timeout=600.0) as client:
        try:
            await client.get(f"{BASE_URL}/")
        except httpx.ConnectError:
            print("Error: server is not running. Start it with: python -m app.main")
            return

        total = len(CAMPAIGN["l_values"]) * CAMPAIGN["samples"]
        print(f"Running campaign: {len(CAMPAIGN['l_values'])} points, {total} formulas...")
        response = await client.post(f"{BASE_URL}/campaign", json=CAMPAIGN)
        if response.status_code != 200:
            print(f"Error {response.status_code}: {response.json().get('detail')}")
            return
        data = response.json()

    pages = []
    for kind, chart in data["charts"].items():
        filename = f"{kind}.html"
        create_html_chart(chart, TITLES.get(kind, kind), filename)
        pages.append({"title": TITLES.get(kind, kind), "file": filename})

    index = create_index_html(pages)
    print(f"\nOpen {index.absolute()} in a browser")


if __name__ == "__main__":
    asyncio.run(main())
