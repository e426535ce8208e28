"""Synthetic counseling-skill corpus generator.

Emits the fixed 13-node taxonomy (1 root, 3 common factors, 2
intervention concepts, 7 skills) plus n labeled example utterances:
roughly 60% carry all three labels with matching edges, 35% carry only
a skill label with a single demonstrates edge, and 5% are neutral on
every task with no edges at all.

A deliberate share of non-neutral utterances (3 in 10) is written from
skill-agnostic templates, so their skill is recoverable from the graph
structure but not from the words alone. That keeps a text-only
classifier measurably below a structure-aware one on the skill task.
"""

from __future__ import annotations

import json

import numpy as np

from .graph import CF_CLASSES, IC_CLASSES, SKILL_CLASSES

# Taxonomy wiring: each skill conveys one intervention concept and
# supports one common factor; fully labeled examples inherit both.
SKILL_TO_IC = {
    "open_ended_questions": "cp",
    "reflective_listening": "ear",
    "affirmation": "ear",
    "validation": "ear",
    "genuineness": "ear",
    "respect_for_autonomy": "cp",
    "asking_for_permission": "cp",
}
SKILL_TO_CF = {
    "open_ended_questions": "task_agreement",
    "reflective_listening": "bond",
    "affirmation": "bond",
    "validation": "bond",
    "genuineness": "bond",
    "respect_for_autonomy": "goal_alignment",
    "asking_for_permission": "task_agreement",
}

_TAXONOMY_DESCRIPTIONS = {
    "root": "Top level of the therapeutic change taxonomy.",
    "bond": "The emotional connection and mutual trust between client and therapist.",
    "goal_alignment": "Agreement between client and therapist on the goals of treatment.",
    "task_agreement": "Agreement on the tasks and methods used to reach treatment goals.",
    "ear": "Empathy, acceptance, and positive regard expressed toward the client.",
    "cp": "Collaboration and partnership in shaping the direction of the work.",
    "open_ended_questions": "Questions inviting elaboration rather than a yes or no answer.",
    "reflective_listening": "Restating the client's meaning to show accurate understanding.",
    "affirmation": "Recognizing the client's strengths, efforts, and positive actions.",
    "validation": "Communicating that the client's feelings and reactions make sense.",
    "genuineness": "Being authentic and transparent rather than distant or scripted.",
    "respect_for_autonomy": "Honoring the client's right to choose their own direction.",
    "asking_for_permission": "Requesting consent before advising or raising a topic.",
}

_TAXONOMY_NAMES = {
    "root": "Therapeutic change",
    "bond": "Bond",
    "goal_alignment": "Goal alignment",
    "task_agreement": "Task agreement",
    "ear": "Empathy, acceptance, and positive regard",
    "cp": "Collaboration and partnership",
    "open_ended_questions": "Open-ended questions",
    "reflective_listening": "Reflective listening",
    "affirmation": "Affirmation",
    "validation": "Validation",
    "genuineness": "Genuineness",
    "respect_for_autonomy": "Respect for autonomy",
    "asking_for_permission": "Asking for permission",
}

_TOPICS = (
    "work",
    "family",
    "sleep",
    "school",
    "money",
    "health",
    "friendships",
    "stress",
    "recovery",
    "exercise",
)

_SKILL_TEMPLATES: dict[str, tuple[str, ...]] = {
    "open_ended_questions": (
        "What feels most important about {topic} right now?",
        "How has {topic} been going since we last met?",
        "What would you like to be different about {topic}?",
        "Where would you like to start with {topic} today?",
    ),
    "reflective_listening": (
        "It sounds like {topic} has been weighing on you lately.",
        "So if I follow, {topic} is where the pressure keeps building.",
        "I hear you saying that {topic} leaves you drained by evening.",
        "You seem to be telling me that {topic} changed after last month.",
    ),
    "affirmation": (
        "You showed real persistence in how you handled {topic} this week.",
        "Sticking with {topic} the way you did took genuine effort.",
        "That step you took around {topic} shows how capable you are.",
        "You deserve credit for the progress you made with {topic}.",
    ),
    "validation": (
        "Anyone facing {topic} like this would feel shaken.",
        "It makes complete sense that {topic} stirs up these feelings.",
        "Your reaction to {topic} is entirely understandable.",
        "Feeling torn about {topic} is a natural response.",
    ),
    "genuineness": (
        "Honestly, hearing about {topic} moved me today.",
        "I will be straightforward with you about {topic}.",
        "Speaking personally, {topic} sounds like a heavy load to carry.",
        "I want to be candid: {topic} worries me too.",
    ),
    "respect_for_autonomy": (
        "The decision about {topic} belongs to you alone.",
        "You are the one who chooses the pace on {topic}.",
        "Whatever direction you pick for {topic}, it is yours to set.",
        "Only you can decide what happens next with {topic}.",
    ),
    "asking_for_permission": (
        "Would it be alright if we discussed {topic} for a moment?",
        "May I share an observation about {topic}?",
        "Is it okay with you if we look closer at {topic}?",
        "Do you mind if I bring up {topic} before we finish?",
    ),
}

# Shared across every skill: no word here separates one skill from
# another, so only the demonstrates edge identifies the label.
_AMBIGUOUS_TEMPLATES = (
    "Let us stay with {topic} a little longer.",
    "There is a lot connected to {topic} in what you shared.",
    "We talked about {topic} before and it keeps coming back.",
    "Take your time as we return to {topic} now.",
    "That part about {topic} stands out in today's conversation.",
    "Let us slow down around {topic} for a moment.",
)

_NEUTRAL_TEMPLATES = (
    "Our session runs fifty minutes and we finish at the usual hour.",
    "Please remember to sign the billing form at the front desk.",
    "The clinic parking garage closes at nine on weekdays.",
    "Next week's appointment moves to Thursday because of the holiday.",
    "The receptionist can reprint your insurance paperwork after we end.",
)


def taxonomy_nodes() -> list[dict]:
    nodes = []
    for nid, kind in [("root", "root")] + [
        (c, "common_factor") for c in CF_CLASSES[:-1]
    ] + [(c, "intervention_concept") for c in IC_CLASSES[:-1]] + [
        (c, "skill") for c in SKILL_CLASSES[:-1]
    ]:
        name = _TAXONOMY_NAMES[nid]
        desc = _TAXONOMY_DESCRIPTIONS[nid]
        nodes.append(
            {
                "id": nid,
                "kind": kind,
                "name": name,
                "description": desc,
                "text": f"{name}. {desc}",
            }
        )
    return nodes


def taxonomy_edges() -> list[dict]:
    edges = [
        {"source": "root", "target": cf, "kind": "includes"}
        for cf in CF_CLASSES[:-1]
    ]
    edges.append({"source": "bond", "target": "ear", "kind": "includes"})
    edges.append({"source": "goal_alignment", "target": "cp", "kind": "includes"})
    edges.append({"source": "task_agreement", "target": "cp", "kind": "includes"})
    for skill in SKILL_CLASSES[:-1]:
        edges.append(
            {"source": skill, "target": SKILL_TO_IC[skill], "kind": "conveys"}
        )
        edges.append(
            {"source": skill, "target": SKILL_TO_CF[skill], "kind": "supports"}
        )
    return edges


def generate_toy_dataset(seed: int, n_examples: int) -> bytes:
    """Build the full graph document; byte-identical for a fixed seed."""
    if n_examples < 15:
        raise ValueError("n_examples must be at least 15 to cover every class")
    rng = np.random.default_rng(seed)
    nodes = taxonomy_nodes()
    edges = taxonomy_edges()

    n_neutral = max(1, int(round(0.05 * n_examples)))
    n_full = int(round(0.60 * n_examples))
    n_skill_only = n_examples - n_full - n_neutral
    skills = SKILL_CLASSES[:-1]

    non_neutral = 0
    for i in range(n_examples):
        nid = f"ex_{i:04d}"
        topic = _TOPICS[int(rng.integers(len(_TOPICS)))]
        if i >= n_full + n_skill_only:
            template = _NEUTRAL_TEMPLATES[int(rng.integers(len(_NEUTRAL_TEMPLATES)))]
            text = template
            labels: dict[str, str] = {"cf": "neutral", "ic": "neutral", "skill": "neutral"}
        else:
            j = non_neutral
            non_neutral += 1
            skill = skills[j % len(skills)]
            ambiguous = j % 10 in (0, 1, 2)
            companion = i < n_full and j % 10 == 5
            if ambiguous:
                template = _AMBIGUOUS_TEMPLATES[
                    int(rng.integers(len(_AMBIGUOUS_TEMPLATES)))
                ]
            else:
                options = _SKILL_TEMPLATES[skill]
                template = options[int(rng.integers(len(options)))]
            text = template.format(topic=topic)
            if i < n_full:
                labels = {
                    "cf": SKILL_TO_CF[skill],
                    "ic": SKILL_TO_IC[skill],
                    "skill": skill,
                }
                edges.append({"source": nid, "target": SKILL_TO_CF[skill], "kind": "fosters"})
                edges.append({"source": nid, "target": SKILL_TO_IC[skill], "kind": "expresses"})
            else:
                labels = {"skill": skill}
            edges.append({"source": nid, "target": skill, "kind": "demonstrates"})
            if companion:
                # A second demonstrated skill: the stored label stays the
                # first-listed one, the edge list keeps both.
                second = skills[(j + 3) % len(skills)]
                edges.append({"source": nid, "target": second, "kind": "demonstrates"})
        nodes.append(
            {
                "id": nid,
                "kind": "example",
                "name": "",
                "description": "",
                "text": text,
                "labels": labels,
            }
        )

    doc = {"nodes": nodes, "edges": edges}
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
