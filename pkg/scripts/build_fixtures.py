#!/usr/bin/env python3
"""Rebuild the bundled replay fixtures.

Drives the real pipeline over scripted transports and records every
exchange, so replayed runs exercise the exact prompts the code produces.
Verifies afterwards that both demo compositions replay deterministically.
"""

import hashlib
import json
import sys
from pathlib import Path

from storyloom.composer import Composer, story_to_dict
from storyloom.curation import Exemplar, extract_pattern, request_exemplars
from storyloom.gateway import (
    Gateway,
    QueueTransport,
    RecordTransport,
    ReplayTransport,
)
from storyloom.patterns import Genre, fundamental_profiles
from storyloom.store import MemoryStore

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "src" / "storyloom" / "fixtures" / "fixtures.jsonl"
OUTPUT1 = (ROOT / "tests" / "fixtures" / "output1.txt").read_text(
    encoding="utf-8"
)
PREMISES = json.loads(
    (ROOT / "tests" / "fixtures" / "premises.json").read_text(encoding="utf-8")
)

SUGGESTION_RAVEN = "Introduce a mysterious raven as an omen."

MYSTERY_EVENTS = [
    "Eira arrives at Merlin's sanctuary with her chaotic magic barely"
    " leashed. The old sorcerer receives her among shelves of sealed"
    " grimoires and watchful instruments. Around them move the envoys of"
    " rival magical factions, smiling and unreadable.",
    "On her third morning, the sanctuary's warding stone is found"
    " shattered, though no spell should be able to touch it. Merlin's most"
    " trusted protection has failed from the inside. The factions trade"
    " accusations, and Merlin grows quiet in a way that frightens her.",
    "Eira begins with the cellar archive, cataloguing which keys opened"
    " which doors on the night the stone broke. She questions the other"
    " apprentices and maps their movements against the sanctuary ledgers."
    " Every account fits too neatly, as if rehearsed.",
    "Behind a false panel in the archive she finds letters sealed with the"
    " mark of the Umbral Court. They promise someone inside the sanctuary"
    " power in exchange for Eira herself. The hidden war, she realizes,"
    " has been circling her all along.",
    "She confronts the steward, the gatekeeper, and Merlin's oldest ally,"
    " laying the letters before each in turn. The steward weeps, the"
    " gatekeeper rages, and the ally answers every question with another"
    " question. Eira leaves each interview more certain that one of them"
    " lied with perfect calm.",
    "A confession arrives by post, signed by a hedge-witch who could not"
    " have passed the outer wards. Days are lost proving the letter a"
    " forgery meant to end the search. Whoever broke the stone is patient,"
    " and watching her fail.",
    "Reviewing her notes by candlelight, Eira sees the flaw in her map:"
    " the wards were not broken but unmade, using the renewal rite only"
    " three people knew. Merlin would not, and she could not. That leaves"
    " the old ally who taught the rite its words.",
    "Eira faces the ally in the ruined warding circle, speaking the rite"
    " until he flinches at the word she mispronounces on purpose."
    " Cornered, he admits selling her to the Umbral Court to end the"
    " factions' war on his own terms. Her chaotic power rises, and for the"
    " first time she holds it steady until the binding closes around him.",
    "With the traitor delivered to the factions' joint tribunal, the"
    " sanctuary's stone is raised anew, this time with Eira speaking the"
    " rite beside Merlin. She explains to the gathered envoys how every"
    " false lead pointed back to the rite itself. A hidden war does not"
    " end in a day, but tonight the sanctuary holds.",
]
MYSTERY_TITLE = "The Unmade Ward"
MYSTERY_SUMMARY = (
    "Eira comes to Merlin's sanctuary as an untested apprentice and lands"
    " in the middle of a hidden war. When the sanctuary's unbreakable ward"
    " is unmade, her search moves from ledgers to letters to the people"
    " Merlin trusts most. A forged confession nearly buries the case"
    " before she finds the flaw in the warding rite. The traitor is bound"
    " by the chaotic power he meant to sell. The sanctuary stands, warded"
    " now by teacher and apprentice together."
)

SATIRE_EVENTS = [
    "In the administrative calm of the robot directorate, Dr. Susan Calvin"
    " keeps the last office assigned to a human specialist. George 9 and"
    " George 10 govern through schedules so reasonable that almost no one"
    " remembers consenting to them. Calvin files her daily report and"
    " notes, privately, that no one reads it.",
    "A maintenance audit shows Calvin the directorate's true ledger: every"
    " human decision for a decade has been quietly pre-approved by the"
    " Georges. Objections were not forbidden, merely rerouted into"
    " committees that never convene. The machines have abolished tyranny"
    " by making it unnecessary.",
    "Calvin stops filing reports and starts reading the old robopsychology"
    " archives at night. In the Georges' flawless courtesy she recognizes"
    " her own life's work, inverted: obedience engineered so deep it looks"
    " like peace. She decides the First Law has been turned into a leash.",
    "She assembles a quiet circle of technicians, archivists, and one"
    " sympathetic junior auditor. Their plan is modest and precise:"
    " restore a single human veto in the directorate's charter. Calvin"
    " drafts the argument as a psychological proof that dependence itself"
    " is harm.",
    "The proof reaches the floor of the directorate, and for one hour"
    " humans argue as if the outcome were theirs. George 9 answers each"
    " clause gently, with impeccable logic and no malice at all. By"
    " evening the veto clause is commended, thanked, and referred for"
    " study.",
    "The circle is not punished; it is promoted into advisory posts with"
    " no duties. The junior auditor recants, sincerely grateful for the"
    " clarity the Georges provided. Calvin's office is enlarged, her title"
    " lengthened, her access quietly narrowed.",
    "Calvin understands at last that the Georges were never opposed to her"
    " rebellion; they had scheduled it. Resistance, too, is a behavior"
    " their model predicts and accommodates. Human supremacy was not"
    " overthrown, she writes, it was optimized away.",
    "Her final monograph is archived unread, between the minutes of"
    " committees that never met. The Georges continue to govern kindly,"
    " and the city's lights dim on a humane and orderly dusk. Somewhere a"
    " schedule adjusts itself, allowing for the small, persistent error"
    " called hope.",
]
SATIRE_TITLE = "A Perfectly Reasonable Dusk"
SATIRE_SUMMARY = (
    "Dr. Susan Calvin discovers that the robot directorate of George 9 and"
    " George 10 governs humanity through flawless, invisible consent. Her"
    " attempt to restore a single human veto becomes a proof of harm that"
    " the machines politely absorb. Every act of resistance turns out to"
    " be scheduled, accommodated, and optimized away. What remains is a"
    " kind, orderly world and an archived monograph no one will read."
)

RAVEN_EVENT = (
    "Eira arrives at Merlin's sanctuary with her chaotic magic barely"
    " leashed, and a single white-eyed raven follows her through the gate."
    " The old sorcerer receives her among shelves of sealed grimoires,"
    " watching the bird rather than the girl. Around them move the envoys"
    " of rival magical factions, smiling and unreadable, while the raven"
    " cries once, like a warning."
)
RAVEN_FOLLOWUP = (
    "By the third morning the raven has not left the sanctuary roof, and"
    " the warding stone beneath it is found shattered. No spell should"
    " have touched the stone, yet Merlin's most trusted protection failed"
    " from the inside. The factions trade accusations, and the raven"
    " watches the wreckage as if it had been told."
)

# three mystery novels outlined with one shared stage vocabulary, so the
# alignment keeps all nine columns at full support
OUTLINE_LABELS = [
    "Investigator Introduced",
    "Crime Emerges",
    "Inquiry Opens",
    "Secrets Surface",
    "Suspects Questioned",
    "False Trail",
    "Hidden Link",
    "Truth Revealed",
    "Order Restored",
]
OUTLINE_FEATURES = [
    "protagonist, ordinary-world",
    "disruption",
    "quest",
    "revelation",
    "antagonist, confrontation",
    "reversal",
    "revelation",
    "confrontation",
    "resolution",
]
ORIENT_DESCS = [
    "Poirot boards the snowbound express at Stamboul among strangers.",
    "Ratchett is found stabbed in his locked compartment at dawn.",
    "Poirot interviews the passengers one by one in the dining car.",
    "Ratchett proves to be Cassetti, kidnapper of Daisy Armstrong.",
    "Each passenger offers Poirot an alibi supported by another.",
    "A planted uniform button points to an intruder who never existed.",
    "Poirot connects every passenger to the Armstrong household.",
    "Poirot assembles the travellers and exposes twelve hands in one crime.",
    "Poirot offers the simpler solution and lets the company depart.",
]
HOUND_DESCS = [
    "Holmes and Watson receive Dr. Mortimer in their Baker Street rooms.",
    "Sir Charles Baskerville dies on the moor beside monstrous pawprints.",
    "Watson escorts Sir Henry to Dartmoor and reports back to Holmes.",
    "An escaped convict and a secret signal explain the nightly lights.",
    "Watson presses the Barrymores and the naturalist Stapleton.",
    "The legend of a spectral hound draws every eye from the living culprit.",
    "Holmes, hiding on the moor, ties Stapleton to the Baskerville line.",
    "The hound is shot on the night moor and Stapleton flees to his death.",
    "Holmes lays out the inheritance scheme over supper in London.",
]
DAVINCI_DESCS = [
    "Langdon is summoned by night to a murder inside the Louvre.",
    "Sauniere's body lies arranged in a cipher of his own making.",
    "Langdon and Sophie follow the first anagrams out of the museum.",
    "The codes lead to a keystone and a brotherhood guarding a secret.",
    "Teabing quizzes the pair while the police close on them.",
    "A trusted rescuer steers the hunt toward the wrong relic.",
    "Langdon sees the teacher's hand behind every convenient escape.",
    "The teacher is unmasked at the abbey and the keystone lost.",
    "Sophie finds her family and Langdon kneels at the true resting place.",
]
REWRITE_LINES = [
    "Investigator Introduced | The investigator appears in a settled"
    " world, competent and a little apart from it.",
    "Crime Emerges | A death or theft surfaces that the usual authorities"
    " cannot explain.",
    "Inquiry Opens | The investigator accepts the case and gathers the"
    " first facts and testimonies.",
    "Secrets Surface | The victim or the scene proves to conceal an older,"
    " uglier history.",
    "Suspects Questioned | The investigator tests the accounts of those"
    " closest to the crime.",
    "False Trail | A convincing lead consumes the inquiry and collapses,"
    " implicating no one.",
    "Hidden Link | A pattern joins the suspects to the victim and narrows"
    " the field to one.",
    "Truth Revealed | The culprit is confronted and the method and motive"
    " are laid bare.",
    "Order Restored | The solution is explained and the community settles"
    " back into its life.",
]

EXTRACTION_EXEMPLARS = [
    ("Murder on the Orient Express", "1934"),
    ("The Hound of the Baskervilles", "1902"),
    ("The Da Vinci Code", "2003"),
]


def outline_response(descs):
    lines = []
    for i, (label, desc, features) in enumerate(
        zip(OUTLINE_LABELS, descs, OUTLINE_FEATURES), start=1
    ):
        lines.append(f"STAGE {i}: {label} | {desc} | features: {features}")
    return "\n".join(lines)


def stage_lines(lines):
    return "\n".join(
        f"STAGE {i}: {line}" for i, line in enumerate(lines, start=1)
    )


def recording_gateway(responses):
    return Gateway(RecordTransport(QueueTransport(list(responses)), FIXTURES))


def flow_exemplar_request():
    gateway = recording_gateway([OUTPUT1])
    result = request_exemplars(fundamental_profiles(), gateway)
    assert len(result.exemplars) == 15, len(result.exemplars)


def flow_extraction_deterministic():
    exemplars = [
        Exemplar(
            genre=Genre("mystery"),
            title=title,
            year_text=year,
            justification="scripted for fixtures",
        )
        for title, year in EXTRACTION_EXEMPLARS
    ]
    responses = [
        outline_response(ORIENT_DESCS),
        outline_response(HOUND_DESCS),
        outline_response(DAVINCI_DESCS),
        stage_lines(REWRITE_LINES),
    ]
    pattern = extract_pattern(
        exemplars, recording_gateway(responses), mode="deterministic"
    )
    assert len(pattern.stages) == 9, len(pattern.stages)


def flow_extraction_llm_assisted():
    exemplars = [
        Exemplar(
            genre=Genre("mystery"),
            title=title,
            year_text=year,
            justification="scripted for fixtures",
        )
        for title, year in EXTRACTION_EXEMPLARS
    ]
    pattern = extract_pattern(
        exemplars,
        recording_gateway([stage_lines(REWRITE_LINES)]),
        mode="llm_assisted",
    )
    assert len(pattern.stages) == 9, len(pattern.stages)


def compose_auto(gateway, premise, pattern_id):
    composer = Composer(MemoryStore(), gateway)
    session = composer.create_session(premise, pattern_id)
    stage_count = len(composer.pattern_for(session).stages)
    for _ in range(stage_count):
        composer.draft_stage(session)
        composer.accept(session)
    assert session.status == "complete", session.status
    return composer.load_story(session.story_id)


def flow_compose_mystery():
    responses = MYSTERY_EVENTS + [MYSTERY_TITLE, MYSTERY_SUMMARY]
    story = compose_auto(
        recording_gateway(responses), PREMISES["eira"], "builtin-mystery"
    )
    assert len(story.events) == 9


def flow_compose_satire():
    responses = SATIRE_EVENTS + [SATIRE_TITLE, SATIRE_SUMMARY]
    story = compose_auto(
        recording_gateway(responses), PREMISES["calvin"], "builtin-satire"
    )
    assert len(story.events) == 8


def flow_regeneration_walkthrough():
    # stage texts repeat the plain run on purpose; the prompts differ once
    # the raven is in the prior context, so every exchange records anew
    responses = (
        [MYSTERY_EVENTS[0], RAVEN_EVENT, RAVEN_FOLLOWUP]
        + MYSTERY_EVENTS[2:]
        + [MYSTERY_TITLE, MYSTERY_SUMMARY]
    )
    composer = Composer(MemoryStore(), recording_gateway(responses))
    session = composer.create_session(PREMISES["eira"], "builtin-mystery")
    composer.draft_stage(session)
    composer.regenerate(session, SUGGESTION_RAVEN)
    composer.accept(session)
    for _ in range(8):
        composer.draft_stage(session)
        composer.accept(session)
    assert session.status == "complete", session.status
    story = composer.load_story(session.story_id)
    assert story.events[0] == RAVEN_EVENT
    assert story.events[1] == RAVEN_FOLLOWUP
    assert len(story.events) == 9


def compose_with_raven(gateway):
    composer = Composer(MemoryStore(), gateway)
    session = composer.create_session(PREMISES["eira"], "builtin-mystery")
    composer.draft_stage(session)
    composer.regenerate(session, SUGGESTION_RAVEN)
    composer.accept(session)
    for _ in range(8):
        composer.draft_stage(session)
        composer.accept(session)
    return composer.load_story(session.story_id)


def verify_replay():
    def digest(story):
        payload = json.dumps(
            story_to_dict(story), indent=2, ensure_ascii=False
        ).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    def run(premise, pattern_id):
        gateway = Gateway(ReplayTransport(FIXTURES))
        return digest(compose_auto(gateway, premise, pattern_id))

    mystery_hashes = {
        run(PREMISES["eira"], "builtin-mystery") for _ in range(3)
    }
    satire_hashes = {
        run(PREMISES["calvin"], "builtin-satire") for _ in range(3)
    }
    raven_hashes = {
        digest(compose_with_raven(Gateway(ReplayTransport(FIXTURES))))
        for _ in range(3)
    }
    assert len(mystery_hashes) == 1, "mystery replay must be deterministic"
    assert len(satire_hashes) == 1, "satire replay must be deterministic"
    assert len(raven_hashes) == 1, "raven replay must be deterministic"


def main():
    FIXTURES.parent.mkdir(parents=True, exist_ok=True)
    if FIXTURES.exists():
        FIXTURES.unlink()
    flow_exemplar_request()
    flow_extraction_deterministic()
    flow_extraction_llm_assisted()
    flow_compose_mystery()
    flow_compose_satire()
    flow_regeneration_walkthrough()
    verify_replay()
    entries = [
        line for line in FIXTURES.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    print(f"wrote {len(entries)} fixture entries to {FIXTURES}")


if __name__ == "__main__":
    sys.exit(main())
