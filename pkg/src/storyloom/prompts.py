"""The prompt-template catalog and its formatting helpers.

Every LLM call in the pipeline renders one of these templates.  Bodies are
data: curation and composition code binds slots and submits, nothing here
talks to the network.  Helpers are pure string formatting.
"""

from __future__ import annotations

from .gateway import PromptTemplate
from .patterns import GenreProfile

# model identifiers are data; the wire contract does not depend on them
MODEL_EXEMPLARS = "gpt-3.5-turbo-0125"
MODEL_PATTERNS = "gpt-4-turbo"

OUTLINE_MIN_STAGES = 5
OUTLINE_MAX_STAGES = 12

# controlled feature vocabulary for outline stages
ROLE_TERMS = ("protagonist", "antagonist", "mentor", "ally")
MOVE_TERMS = (
    "disruption",
    "quest",
    "confrontation",
    "revelation",
    "reversal",
    "resolution",
)
SETTING_TERMS = ("ordinary-world", "special-world")
FEATURE_TERMS = ROLE_TERMS + MOVE_TERMS + SETTING_TERMS

ROMANCE_NOTE = (
    "Note that the genre of “romance” refers here to epic plots, "
    "and not to the modern notion of “love story”, and thus all "
    "your choices of the romance genre must concern epic action. "
)

_COUNT_WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six",
    7: "seven", 8: "eight", 9: "nine", 10: "ten", 11: "eleven", 12: "twelve",
}


def count_word(n: int) -> str:
    return _COUNT_WORDS.get(n, str(n))


def display_genre(name: str) -> str:
    # capitalize the first letter only; seeded names keep their own casing
    return name[:1].upper() + name[1:]


def definitions_block(profiles: list[GenreProfile]) -> str:
    lines = [
        f"{i}. {display_genre(p.genre.name)}: {p.definition}"
        for i, p in enumerate(profiles, start=1)
    ]
    return "\n".join(lines)


def romance_note_for(profiles: list[GenreProfile]) -> str:
    if any(p.genre.name == "romance" for p in profiles):
        return ROMANCE_NOTE
    return ""


EXEMPLAR_REQUEST = PromptTemplate(
    id="exemplar-request",
    slots=("definitions", "count", "romance_note"),
    body=(
        "Please consider the following tentative genre definitions:\n"
        "\n"
        "$definitions\n"
        "\n"
        "Please indicate, for each of these $count genres, three titles - "
        "together with year of publication/release - of books or films which "
        "could be predominantly classified in the genre and could not be "
        "significantly classified in any of the other genres. "
        "${romance_note}Please follow strictly the genre characterizations "
        "provided above. Please take into consideration and mention, as you "
        "explain each choice, both the characteristics of the world and the "
        "indication of what is expected of the protagonist, always with "
        "reference to the characterizations."
    ),
)

OUTLINE_STORY = PromptTemplate(
    id="outline-story",
    slots=(
        "title",
        "year_text",
        "genre",
        "stage_min",
        "stage_max",
        "roles",
        "moves",
        "settings",
    ),
    body=(
        "Summarize the plot of the narrative below as an ordered list of "
        "stages.\n"
        "\n"
        "Narrative: “$title” ($year_text), genre: $genre.\n"
        "\n"
        "Write between $stage_min and $stage_max stages covering the whole "
        "plot in order. Each stage must be exactly one line of the form:\n"
        "STAGE <number>: <label> | <description> | features: <terms>\n"
        "\n"
        "The label has at most six words. The description is exactly one "
        "sentence. <terms> is a comma-separated list of one to four items "
        "chosen only from this vocabulary: roles: $roles; moves: $moves; "
        "settings: $settings. Output only the STAGE lines, nothing else."
    ),
)

STAGE_REWRITE = PromptTemplate(
    id="stage-rewrite",
    slots=("genre", "stage_count", "stages_block", "names_clause"),
    body=(
        "The stages below were distilled from several $genre narratives. "
        "Each stage lists the descriptions of the scenes it was distilled "
        "from. Rewrite every stage as a generic $genre pattern stage that "
        "fits all of its source descriptions.\n"
        "\n"
        "$stages_block\n"
        "\n"
        "Answer with exactly $stage_count lines, one per stage, in the same "
        "order, each of the form:\n"
        "STAGE <number>: <label> | <description>\n"
        "\n"
        "The label has at most six words. The description has one to three "
        "sentences and speaks of roles (the protagonist, an antagonist, an "
        "ally), never of specific characters or places. $names_clause "
        "Output only the STAGE lines, nothing else."
    ),
)

PATTERN_DIRECT = PromptTemplate(
    id="pattern-direct",
    slots=("genre", "titles", "stage_min", "stage_max", "names_clause"),
    body=(
        "Consider these $genre narratives: $titles.\n"
        "\n"
        "Describe the stage sequence that their plots share, as a generic "
        "$genre pattern. Write between $stage_min and $stage_max stages, "
        "each exactly one line of the form:\n"
        "STAGE <number>: <label> | <description>\n"
        "\n"
        "The label has at most six words. The description has one to three "
        "sentences and speaks of roles (the protagonist, an antagonist, an "
        "ally), never of specific characters or places. $names_clause "
        "Output only the STAGE lines, nothing else."
    ),
)

DRAFT_STAGE = PromptTemplate(
    id="draft-stage",
    slots=(
        "premise",
        "genre",
        "world",
        "protagonist",
        "stage_name",
        "stage_description",
        "prior_events",
        "suggestion_clause",
    ),
    body=(
        "You are composing a $genre story one event at a time.\n"
        "\n"
        "Premise: $premise\n"
        "Genre profile: the world is $world; the protagonist $protagonist.\n"
        "\n"
        "Story so far:\n"
        "$prior_events\n"
        "\n"
        "Current stage: $stage_name. $stage_description\n"
        "\n"
        "${suggestion_clause}Write the next event of the story, advancing "
        "exactly this stage. Respond with 2 to 5 sentences of narrative "
        "prose and nothing else: no headings, no stage names, no quotation "
        "of these instructions."
    ),
)

STORY_TITLE = PromptTemplate(
    id="story-title",
    slots=("premise", "events"),
    body=(
        "Here is a complete story.\n"
        "\n"
        "Premise: $premise\n"
        "\n"
        "$events\n"
        "\n"
        "Propose a title for this story. Respond with the title only, at "
        "most twelve words, no quotation marks, no trailing punctuation."
    ),
)

STORY_SUMMARY = PromptTemplate(
    id="story-summary",
    slots=("premise", "events"),
    body=(
        "Here is a complete story.\n"
        "\n"
        "Premise: $premise\n"
        "\n"
        "$events\n"
        "\n"
        "Summarize the whole story in 3 to 6 sentences. Respond with the "
        "summary only."
    ),
)

CORRECTIVE_RETRY = PromptTemplate(
    id="corrective-retry",
    slots=("violations", "format_hint"),
    body=(
        "Your previous response could not be accepted for these reasons:\n"
        "$violations\n"
        "\n"
        "$format_hint"
    ),
)

EXEMPLAR_FORMAT_HINT = (
    "Please answer again as a numbered list with one item per genre, in the "
    "order given, each containing exactly three entries of the form: "
    "\"Title\" by Author (year) - explanation."
)

STAGE_LINE_FORMAT_HINT = (
    "Please answer again using only lines of the form requested above, one "
    "line per stage, in order."
)

EVENT_FORMAT_HINT = (
    "Rewrite the event as 2 to 5 sentences of narrative prose, with nothing "
    "else around it."
)

TITLE_FORMAT_HINT = (
    "Answer again with the title only: at most twelve words on one line, no "
    "quotation marks."
)

SUMMARY_FORMAT_HINT = (
    "Answer again with the summary only, written as 3 to 6 sentences."
)

CATALOG = {
    t.id: t
    for t in (
        EXEMPLAR_REQUEST,
        OUTLINE_STORY,
        STAGE_REWRITE,
        PATTERN_DIRECT,
        DRAFT_STAGE,
        STORY_TITLE,
        STORY_SUMMARY,
        CORRECTIVE_RETRY,
    )
}


def build_exemplar_prompt(profiles: list[GenreProfile]) -> str:
    """Render the exemplar request for the given genre profiles."""
    from .gateway import render

    return render(
        EXEMPLAR_REQUEST,
        {
            "definitions": definitions_block(profiles),
            "count": count_word(len(profiles)),
            "romance_note": romance_note_for(profiles),
        },
    )
