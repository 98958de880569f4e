"""The 70-prompt language bank.

Prompts are action-expression x target-region combinations; every region
description belongs to exactly one task, so each prompt maps to one task
while letting phrasing vary.
"""

from dataclasses import dataclass

ACTION_EXPRESSIONS = (
    "move the cargo to",
    "transport the cargo to",
    "deliver the cargo to",
    "push the cargo toward",
    "carry the cargo into",
    "guide the cargo to",
    "bring the cargo to",
)

# region -> owning task
REGIONS = (
    ("the gentle-bend outlet", "A"),
    ("the far right chamber", "A"),
    ("the shallow-turn exit", "A"),
    ("the eastern outlet pocket", "A"),
    ("the double-bend outlet", "B"),
    ("the lower corridor end", "B"),
    ("the south chamber", "B"),
    ("the hairpin outlet", "C"),
    ("the switchback chamber", "C"),
    ("the sharp-turn return pocket", "C"),
)


@dataclass(frozen=True)
class PromptBank:
    prompts: tuple[str, ...]
    prompt_to_task: tuple[str, ...]  # indexed by prompt_id

    def __len__(self) -> int:
        return len(self.prompts)

    def task_of(self, prompt_id: int) -> str:
        return self.prompt_to_task[prompt_id]

    def ids_for_task(self, task_id: str) -> list[int]:
        return [i for i, t in enumerate(self.prompt_to_task) if t == task_id]


def build_prompt_bank() -> PromptBank:
    prompts = []
    tasks = []
    for expr in ACTION_EXPRESSIONS:
        for region, task in REGIONS:
            prompts.append(f"{expr} {region}")
            tasks.append(task)
    return PromptBank(prompts=tuple(prompts), prompt_to_task=tuple(tasks))
