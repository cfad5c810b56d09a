/**
 * Response shapes of the registry REST API, as zod schemas.
 *
 * The portal never reformats what it shows: status strings, owner
 * addresses and FAR amounts are rendered exactly as received, so these
 * schemas are strict wherever the API shape is fixed. FAR quantities are
 * strings in minimal fixed-point form ("4", "2.5", "0").
 */

import { z } from "zod";

export const APPLICATION_STATUSES = [
  "SUBMITTED",
  "SENT_BACK_FOR_CORRECTION",
  "REJECTED",
  "VERIFIED",
  "DRC_ISSUED",
] as const;

export const USER_STATUSES = [
  "PENDING_KYC",
  "PENDING_ADMIN",
  "ACTIVE",
  "REJECTED",
] as const;

export const DECISIONS = ["APPROVE", "REJECT", "SEND_BACK"] as const;

export const ApplicationStatusSchema = z.enum(APPLICATION_STATUSES);
export const UserStatusSchema = z.enum(USER_STATUSES);
export const RoleNameSchema = z.enum(["ADMIN", "OFFICER", "USER"]);

export type ApplicationStatus = z.infer<typeof ApplicationStatusSchema>;
export type UserStatus = z.infer<typeof UserStatusSchema>;
export type RoleName = z.infer<typeof RoleNameSchema>;
export type Decision = (typeof DECISIONS)[number];

export const TrailEntrySchema = z.strictObject({
  officer: z.string(),
  sub_department: z.string(),
  decision: z.enum(DECISIONS),
  remarks: z.string(),
  tx_id: z.string(),
  height: z.number(),
});
export type TrailEntry = z.infer<typeof TrailEntrySchema>;

export const ApplicationSchema = z.strictObject({
  application_id: z.string(),
  applicant: z.string(),
  notice_id: z.string(),
  land_details_uri: z.string(),
  claimed_far: z.string(),
  status: ApplicationStatusSchema,
  verification_trail: z.array(TrailEntrySchema),
  next_department_index: z.number(),
  submitted_at: z.number(),
  /** Present only on single-application reads while status is SUBMITTED. */
  pending_department: z.string().optional(),
});
export type Application = z.infer<typeof ApplicationSchema>;

export const NoticeSchema = z.strictObject({
  notice_id: z.string(),
  sending_zone: z.string(),
  land_description_uri: z.string(),
  issued_by: z.string(),
  issued_at: z.number(),
  open: z.boolean(),
});
export type Notice = z.infer<typeof NoticeSchema>;

export const LandSchema = z.strictObject({
  plot_id: z.string(),
  area: z.string(),
  zone: z.string(),
});
export type Land = z.infer<typeof LandSchema>;

export const TokenSchema = z.strictObject({
  token_id: z.number(),
  drc_id: z.string(),
  owner: z.string(),
  uri: z.string(),
  issuer_signature: z.string(),
  burned: z.boolean(),
  far_available: z.string(),
  claimed_far: z.string(),
  land_count: z.number(),
  /** Keyed by ordinal ("1", "2", ...) as the ledger stores them. */
  lands: z.record(z.string(), LandSchema),
  sending_zone: z.string(),
  issued_against: z.string(),
  approved_operator: z.string().nullish(),
  eligible_for_burn: z.boolean(),
  /** Present only on single-token reads: the stored document behind uri. */
  document: z.unknown().optional(),
});
export type Token = z.infer<typeof TokenSchema>;

export const ProvenanceEventSchema = z.discriminatedUnion("kind", [
  z.strictObject({
    kind: z.literal("mint"),
    token_id: z.number(),
    drc_id: z.string(),
    owner: z.string(),
    uri: z.string(),
    tx_id: z.string(),
    height: z.number(),
  }),
  z.strictObject({
    kind: z.literal("transfer"),
    token_id: z.number(),
    from: z.string(),
    to: z.string(),
    tx_id: z.string(),
    height: z.number(),
  }),
  z.strictObject({
    kind: z.literal("utilize"),
    token_id: z.number(),
    far_used: z.string(),
    receiving_zone: z.string(),
    approved_by: z.string(),
    tx_id: z.string(),
    height: z.number(),
  }),
  z.strictObject({
    kind: z.literal("burn"),
    token_id: z.number(),
    drc_id: z.string(),
    tx_id: z.string(),
    height: z.number(),
  }),
  z.strictObject({
    kind: z.literal("recover"),
    token_id: z.number(),
    from: z.string(),
    to: z.string(),
    tx_id: z.string(),
    height: z.number(),
  }),
]);
export type ProvenanceEvent = z.infer<typeof ProvenanceEventSchema>;

export const RoleAssignmentSchema = z.strictObject({
  subject: z.string(),
  role: RoleNameSchema,
  sub_department: z.string().nullable(),
  granted_by: z.string(),
  granted_at: z.number(),
});
export type RoleAssignment = z.infer<typeof RoleAssignmentSchema>;

/** Identity rows carry a free-form details map and may grow fields, so loose. */
export const UserSchema = z.looseObject({
  user_id: z.string(),
  status: UserStatusSchema,
  details: z.record(z.string(), z.unknown()).optional(),
  address: z.string().optional(),
  reference_id: z.string().optional(),
  roles: z.array(RoleAssignmentSchema).optional(),
  tokens: z.array(z.number()).optional(),
});
export type User = z.infer<typeof UserSchema>;

export const PendingTxSchema = z.strictObject({
  tx_id: z.string(),
  sender: z.string(),
  nonce: z.number(),
  kind: z.string(),
  status: z.literal("pending"),
});
export type PendingTx = z.infer<typeof PendingTxSchema>;

export const ReceiptSchema = z.union([
  z.strictObject({ tx_id: z.string(), status: z.literal("pending") }),
  z.strictObject({
    tx_id: z.string(),
    height: z.number(),
    index: z.number(),
    status: z.literal("applied"),
    result: z.unknown().optional(),
  }),
  z.strictObject({
    tx_id: z.string(),
    height: z.number(),
    index: z.number(),
    status: z.literal("failed"),
    error: z.string(),
    detail: z.string(),
  }),
]);
export type Receipt = z.infer<typeof ReceiptSchema>;

export const OutboxEntrySchema = z.strictObject({
  at: z.number(),
  body: z.string(),
  channel: z.string(),
  subject: z.string(),
  to: z.string(),
});
export type OutboxEntry = z.infer<typeof OutboxEntrySchema>;

export const RegistrationSchema = z.strictObject({
  user_id: z.string(),
  challenge_id: z.string(),
  status: UserStatusSchema,
});
export type Registration = z.infer<typeof RegistrationSchema>;

export const MetaSchema = z.strictObject({
  departments: z.array(z.string()),
  sending_zones: z.array(z.string()),
  receiving_zones: z.array(z.string()),
  block_interval_seconds: z.number(),
});
export type Meta = z.infer<typeof MetaSchema>;

export interface Credentials {
  user_id: string;
  password: string;
}
