import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { escapeHtml, viewModelToHtml } from "../src/html.js";
import { RoomStateBody, RoundBeginBody, ServerMessage } from "../src/protocol.js";
import { RenderInputs, render } from "../src/viewmodel.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixtures = join(here, "fixtures");
const transcript = JSON.parse(readFileSync(join(fixtures, "transcript.json"), "utf8")) as {
  messages: ServerMessage[];
};

function framesWithNames(): { body: RoundBeginBody; names: Record<number, string | null> }[] {
  const out: { body: RoundBeginBody; names: Record<number, string | null> }[] = [];
  let names: Record<number, string | null> = {};
  for (const message of transcript.messages) {
    if (message.type === "room_state") {
      names = {};
      for (const seat of (message.body as RoomStateBody).seats) {
        names[seat.seat] = seat.name;
      }
    } else if (message.type === "round_begin") {
      out.push({ body: message.body, names: { ...names } });
    }
  }
  return out;
}

const frames = framesWithNames();

function inputsFor(frame: (typeof frames)[number]): RenderInputs {
  return {
    view: frame.body.view,
    enabledActions: frame.body.enabled_actions,
    forcedSkip: frame.body.forced_skip,
    deadlineMs: frame.body.deadline_ms,
    nowMs: (frame.body.deadline_ms ?? 30_000) - 30_000,
    names: frame.names,
    locked: false,
    rejection: null,
  };
}

function countOccurrences(text: string, needle: string): number {
  return text.split(needle).length - 1;
}

describe("dashboard html", () => {
  it("renders five named panels for every frame", () => {
    for (const frame of frames) {
      const html = viewModelToHtml(render(inputsFor(frame)));
      for (const panel of ["projects", "immunities", "capabilities", "scoreboard", "controls"]) {
        expect(html, `round ${frame.body.round}`).toContain(`class="panel ${panel}"`);
      }
      expect(html).toContain(`data-round="${frame.body.round}"`);
    }
  });

  it("disabled buttons carry the disabled attribute, enabled ones do not", () => {
    for (const frame of frames) {
      const vm = render(inputsFor(frame));
      const html = viewModelToHtml(vm);
      const enabledCount =
        vm.projects.reduce((n, p) => n + p.tiles.filter((t) => t.enabled).length, 0) +
        vm.immunities.filter((t) => t.repairEnabled).length +
        vm.controls.peerTargets.filter((t) => t.enabled).length +
        (vm.controls.passEnabled ? 1 : 0);
      const buttonCount = countOccurrences(html, "<button");
      const disabledCount = countOccurrences(html, " disabled");
      expect(buttonCount - disabledCount, `round ${frame.body.round}`).toBe(enabledCount);
    }
  });

  it("announces a sanction with the pass-only notice", () => {
    const sanctioned = frames.find((f) => f.body.forced_skip)!;
    const html = viewModelToHtml(render(inputsFor(sanctioned)));
    expect(html).toContain("You are sanctioned");
    expect(html).toContain(`data-action="skip"`);
    expect(html).not.toContain(`data-action="skip" disabled`);
  });

  it("labels every color tile with its color name as text", () => {
    const frame = frames[0];
    const html = viewModelToHtml(render(inputsFor(frame)));
    for (const color of ["blue", "red", "yellow"]) {
      expect(countOccurrences(html, `>${color}`)).toBeGreaterThan(0);
    }
  });

  it("escapes player names so markup cannot leak into the page", () => {
    const frame = frames.find((f) => !f.body.forced_skip)!;
    const names = { ...frame.names, 0: `<img src=x>` };
    const html = viewModelToHtml(
      render({ ...inputsFor(frame), names }),
    );
    expect(html).not.toContain("<img src=x>");
    expect(html).toContain("&lt;img src=x&gt;");
  });

  it("shows the rejection notice verbatim but escaped", () => {
    const frame = frames.find((f) => !f.body.forced_skip)!;
    const html = viewModelToHtml(
      render({ ...inputsFor(frame), rejection: "wrong_round" }),
    );
    expect(html).toContain("rejected: wrong_round");
  });

  it("matches the golden page for the first round", () => {
    const goldenPath = join(fixtures, "round1.golden.html");
    const html = viewModelToHtml(render(inputsFor(frames[0])));
    if (process.env.REGEN_GOLDEN === "1" || !existsSync(goldenPath)) {
      writeFileSync(goldenPath, html + "\n");
    }
    expect(html + "\n").toBe(readFileSync(goldenPath, "utf8"));
  });
});

describe("escapeHtml", () => {
  it("neutralizes the four html metacharacters", () => {
    expect(escapeHtml(`<a href="x">&</a>`)).toBe("&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;");
  });
});
