"""Run a complete co-design session against an in-process service and print
every intermediate artifact: the elicited document, the pedagogy sentence,
the candidate translations with rationales, the refined game sentence, the
paragraph, the pseudocode, and the trace chain.

Usage:
    python3 scripts/demo_session.py [seed]
"""

import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from pedforge.api import ServeConfig, create_app

ANSWERS = [
    ("ConceptScope", "fraction equivalence concepts"),
    ("Materials", "printed fraction card sets"),
    ("ObservableAction", "solve matching problems"),
    ("PerformanceTarget", "solve 8 of 10 matches within 15 minutes"),
    ("Context", "environment: kitchen; realism: stylized; tone: playful"),
]


def heading(title: str):
    print(f"\n=== {title} " + "=" * max(0, 60 - len(title)))


def main() -> None:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    data_dir = Path(tempfile.mkdtemp(prefix="pedforge-demo-"))
    app = create_app(ServeConfig(data_dir=data_dir, mock_seed=seed))
    with TestClient(app) as client:
        project_id = client.post("/projects").json()["id"]
        print(f"project {project_id} (seed {seed}, data in {data_dir})")

        heading("requirement extraction")
        for field, text in ANSWERS:
            question = client.get(f"/projects/{project_id}/question").json()
            print(f"Q [{question['field']}] {question['prompt']}")
            options = client.get(
                f"/projects/{project_id}/options/{question['field']}"
            ).json()["options"]
            print(f"   suggestions: {options}")
            result = client.post(
                f"/projects/{project_id}/answers",
                json={"field": field, "text": text},
            ).json()
            verdict = "pass" if result["specificity"]["passed"] else "fail"
            print(f"A {text}  -> {verdict}")

        heading("pedagogy sentence")
        pedagogy = client.post(f"/projects/{project_id}/pedagogy-sentence").json()
        print(pedagogy["canonical"])

        heading("translation candidates")
        candidates = client.post(
            f"/projects/{project_id}/candidates", json={"n": 3}
        ).json()["candidates"]
        for candidate in candidates:
            print(f"[{candidate['id']}] {candidate['canonical']}")
            for rationale in candidate["rationales"]:
                print(f"    {rationale['kind']}: {rationale['explanation']}")

        heading("edit, accept, refine")
        client.patch(
            f"/projects/{project_id}/candidates/c2/slots/Noun",
            json={"text": "fraction strips", "rationale": "more tactile content"},
        )
        client.post(f"/projects/{project_id}/candidates/c2/accept")
        refined = client.post(
            f"/projects/{project_id}/refine",
            json={"instruction": 'set verb to "stack and compare"'},
        ).json()
        print(f"refined -> {refined['content']}")

        heading("zoom: paragraph")
        paragraph = client.post(
            f"/projects/{project_id}/artifacts/{refined['id']}/zoom"
        ).json()
        print(paragraph["content"])

        heading("zoom: pseudocode")
        pseudocode = client.post(
            f"/projects/{project_id}/artifacts/{paragraph['id']}/zoom"
        ).json()
        print(pseudocode["content"])

        heading("trace")
        chain = client.get(
            f"/projects/{project_id}/trace/artifact:{pseudocode['id']}"
        ).json()
        for link in chain["links"]:
            event = link["event"]
            print(f"{link['ref']:28s} <- #{event['sequence']} {event['action']}")

        events = client.get(f"/projects/{project_id}/events").json()["events"]
        print(f"\n{len(events)} events recorded; project file: "
              f"{data_dir / (project_id + '.pedforge')}")


if __name__ == "__main__":
    main()
