// Wire types for the room server's WebSocket protocol. Envelope keys are
// camelCase; body keys are snake_case, mirroring the server's serializers.
// This module never touches the network: parsing and building only.

export const PROTOCOL_VERSION = 1;

export type Color = "blue" | "red" | "yellow";
export type ProjectSize = "small" | "medium" | "large";
export type ActionKind = "project_task" | "immunity_task" | "peer_sanction" | "skip";
export type SanctionKind = "none" | "manager" | "peer";

export interface WireAction {
  kind: ActionKind;
  size?: ProjectSize;
  color?: Color;
  target?: string;
}

export interface SlotWire {
  status: "held" | "lost";
  lost_at_round: number | null;
  deadline_round: number | null;
  capability_available: boolean;
}

export interface ProjectWire {
  required: Color[];
  completed: Color[];
}

export interface SanctionWire {
  kind: SanctionKind;
  rounds_remaining: number;
  restore_colors: Color[];
}

export interface PlayerWire {
  player_id: string;
  score: number;
  risk_score: number;
  slots: Record<Color, SlotWire>;
  projects: Record<ProjectSize, ProjectWire>;
  sanction: SanctionWire;
}

export interface PeerWire {
  player_id: string;
  seat: number;
  score: number;
  compliant: boolean;
  immunities: Record<Color, boolean>;
  sanctioned: boolean;
}

export interface GameConfigWire {
  rounds: number;
  attack_probability: number;
  manager_observability: number;
  immunity_deadline: number;
  project_scores: Record<ProjectSize, number>;
  project_task_counts: Record<ProjectSize, number>;
  sanction_rounds_per_violation: number;
  peer_sanction_duration: number;
  attack_kind_weights: Record<string, number>;
  regime: "individual" | "group";
  player_count: number;
  seed: number;
}

export interface PlayerViewWire {
  game_id: string;
  round: number;
  phase: string;
  seat: number;
  config: GameConfigWire;
  player: PlayerWire;
  peers: PeerWire[];
}

export interface SeatInfoWire {
  seat: number;
  player_id: string;
  kind: "human" | "bot" | "open";
  name: string | null;
  connected: boolean;
}

export interface SurveyItemWire {
  id: string;
  text: string;
  min: number;
  max: number;
  min_label: string;
  max_label: string;
}

// -- server -> client bodies ------------------------------------------------

export interface JoinedBody {
  seat: number;
  player_id: string;
  seat_token: string;
  name: string | null;
  reconnected: boolean;
}

export interface RoomStateBody {
  lifecycle: "lobby" | "in-round" | "between-rounds" | "finished";
  round: number | null;
  deadline_ms: number | null;
  seats: SeatInfoWire[];
  you: number | null;
  frozen: boolean;
  config: GameConfigWire;
  state_digest: string | null;
}

export interface RoundBeginBody {
  round: number;
  deadline_ms: number | null;
  timeout_seconds: number;
  view: PlayerViewWire;
  enabled_actions: WireAction[];
  forced_skip: boolean;
}

export interface RoundActionOutcome {
  player_id: string;
  applied: boolean;
  action: WireAction;
  reason?: string;
  banked?: number;
  timed_out?: boolean;
}

export interface RoundResultBody {
  round: number;
  actions: RoundActionOutcome[];
  attacks: {
    player_id: string;
    attack_kind: string;
    lost: Color[];
    capability_lost: Color[];
    cleared_tasks: [string, string][];
  }[];
  sanctions: Record<string, unknown>[];
  sanctions_lifted: Record<string, unknown>[];
  scores: Record<string, number>;
  game_over: boolean;
  view: PlayerViewWire;
}

export interface GameOverBody {
  game_id: string;
  final_scores: Record<string, number>;
  rounds: number;
  attack_count: number;
  state_digest: string;
}

export interface SurveyPromptBody {
  game_id: string;
  items: SurveyItemWire[];
}

export interface ActionAckBody {
  kind?: "survey";
  round?: number;
  action?: WireAction;
  item?: string;
  value?: number;
}

export interface ActionRejectedBody {
  reason: string;
  round?: number;
}

export interface ErrorBody {
  reason: string;
  detail: string;
}

interface EnvelopeOf<T extends string, B> {
  type: T;
  roomCode: string | null;
  protocolVersion: number;
  requestId: string | null;
  body: B;
}

export type ServerMessage =
  | EnvelopeOf<"joined", JoinedBody>
  | EnvelopeOf<"room_state", RoomStateBody>
  | EnvelopeOf<"round_begin", RoundBeginBody>
  | EnvelopeOf<"round_result", RoundResultBody>
  | EnvelopeOf<"game_over", GameOverBody>
  | EnvelopeOf<"survey_prompt", SurveyPromptBody>
  | EnvelopeOf<"action_ack", ActionAckBody>
  | EnvelopeOf<"action_rejected", ActionRejectedBody>
  | EnvelopeOf<"error", ErrorBody>;

export type ServerMessageType = ServerMessage["type"];

const SERVER_TYPES: ReadonlySet<string> = new Set([
  "joined",
  "room_state",
  "round_begin",
  "round_result",
  "game_over",
  "survey_prompt",
  "action_ack",
  "action_rejected",
  "error",
]);

export type ParseResult =
  | { ok: true; message: ServerMessage }
  | { ok: false; error: "unparseable" | "bad_envelope" | "unknown_type" | "version_mismatch"; detail: string };

export function parseServerMessage(raw: string): ParseResult {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return { ok: false, error: "unparseable", detail: "not JSON" };
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    return { ok: false, error: "bad_envelope", detail: "not an object" };
  }
  const envelope = data as Record<string, unknown>;
  if (typeof envelope.type !== "string") {
    return { ok: false, error: "bad_envelope", detail: "missing type" };
  }
  if (envelope.protocolVersion !== PROTOCOL_VERSION) {
    return {
      ok: false,
      error: "version_mismatch",
      detail: `server speaks protocol ${String(envelope.protocolVersion)}, client speaks ${PROTOCOL_VERSION}`,
    };
  }
  if (!SERVER_TYPES.has(envelope.type)) {
    return { ok: false, error: "unknown_type", detail: `unknown message type ${envelope.type}` };
  }
  if (typeof envelope.body !== "object" || envelope.body === null) {
    return { ok: false, error: "bad_envelope", detail: "missing body" };
  }
  return { ok: true, message: data as ServerMessage };
}

// -- client -> server -------------------------------------------------------

export type JoinBody = { name: string } | { seat_token: string };

export interface SubmitActionBody {
  round: number;
  action: WireAction;
}

export interface SurveyAnswerBody {
  item: string;
  value: number;
}

export type ClientMessageType = "join" | "submit_action" | "survey_answer";

export function buildEnvelope(
  type: ClientMessageType,
  roomCode: string,
  requestId: string,
  body: JoinBody | SubmitActionBody | SurveyAnswerBody,
): string {
  return JSON.stringify({
    type,
    roomCode,
    protocolVersion: PROTOCOL_VERSION,
    requestId,
    body,
  });
}

/** Structural equality on the wire fields that identify an action. */
export function actionsEqual(a: WireAction, b: WireAction): boolean {
  return (
    a.kind === b.kind &&
    (a.size ?? null) === (b.size ?? null) &&
    (a.color ?? null) === (b.color ?? null) &&
    (a.target ?? null) === (b.target ?? null)
  );
}

export function actionKey(action: WireAction): string {
  return [action.kind, action.size ?? "", action.color ?? "", action.target ?? ""].join("|");
}
