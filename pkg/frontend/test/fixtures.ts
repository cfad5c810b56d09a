/**
 * Hand-written API states for the snapshot suite.
 *
 * Every fixture is passed through the same zod schema the live client
 * uses, so a fixture that drifts from the wire format fails loudly here
 * instead of silently blessing a stale snapshot.
 */

import {
  ApplicationSchema,
  NoticeSchema,
  ProvenanceEventSchema,
  RoleAssignmentSchema,
  TokenSchema,
  UserSchema,
} from "../src/types.js";
import { Session } from "../src/model.js";
import { z } from "zod";

// Deterministic 64-hex addresses, visibly distinct in snapshots.
export const ALICE_ADDR = "aa".repeat(32);
export const BOB_ADDR = "bb".repeat(32);
export const PREM_ADDR = "cc".repeat(32);
export const ADMIN_ADDR = "dd".repeat(32);

export const DEPARTMENTS = ["planning", "revenue", "survey"];
export const RECEIVING_ZONES = ["RZ-A", "RZ-B"];

const tx = (n: number) => n.toString(16).padStart(8, "0").repeat(8);

// -- sessions -----------------------------------------------------------------

export const aliceSession: Session = {
  userId: "U-000001",
  address: ALICE_ADDR,
  status: "ACTIVE",
  isAdmin: false,
  officerDepartments: [],
};

export const pendingSession: Session = {
  userId: "U-000009",
  address: null,
  status: "PENDING_KYC",
  isAdmin: false,
  officerDepartments: [],
};

export const premSession: Session = {
  userId: "U-000002",
  address: PREM_ADDR,
  status: "ACTIVE",
  isAdmin: false,
  officerDepartments: ["planning"],
};

export const adminSession: Session = {
  userId: "admin",
  address: ADMIN_ADDR,
  status: "ACTIVE",
  isAdmin: true,
  officerDepartments: ["revenue", "survey"],
};

// -- notices -----------------------------------------------------------------

export const openNotice = NoticeSchema.parse({
  notice_id: "N-2026-01",
  sending_zone: "SZ-A",
  land_description_uri: "doc:5f9f1a",
  issued_by: ADMIN_ADDR,
  issued_at: 1700000100,
  open: true,
});

// -- applications, one per lifecycle state --------------------------------------

const approval = (dept: string, officer: string, txn: number, height: number) => ({
  officer,
  sub_department: dept,
  decision: "APPROVE",
  remarks: "documents in order",
  tx_id: tx(txn),
  height,
});

export const appSubmitted = ApplicationSchema.parse({
  application_id: "APP-000001",
  applicant: ALICE_ADDR,
  notice_id: "N-2026-01",
  land_details_uri: "doc:11aa22",
  claimed_far: "4",
  status: "SUBMITTED",
  verification_trail: [],
  next_department_index: 0,
  submitted_at: 1700000200,
});

export const appMidPipeline = ApplicationSchema.parse({
  application_id: "APP-000002",
  applicant: ALICE_ADDR,
  notice_id: "N-2026-01",
  land_details_uri: "doc:33cc44",
  claimed_far: "2.5",
  status: "SUBMITTED",
  verification_trail: [approval("planning", PREM_ADDR, 17, 3)],
  next_department_index: 1,
  submitted_at: 1700000300,
});

export const appSentBack = ApplicationSchema.parse({
  application_id: "APP-000003",
  applicant: ALICE_ADDR,
  notice_id: "N-2026-01",
  land_details_uri: "doc:55ee66",
  claimed_far: "3",
  status: "SENT_BACK_FOR_CORRECTION",
  verification_trail: [
    approval("planning", PREM_ADDR, 21, 4),
    {
      officer: ADMIN_ADDR,
      sub_department: "revenue",
      decision: "SEND_BACK",
      remarks: "plot boundary map missing the northern edge <attach survey sheet>",
      tx_id: tx(22),
      height: 5,
    },
  ],
  next_department_index: 1,
  submitted_at: 1700000400,
});

export const appRejected = ApplicationSchema.parse({
  application_id: "APP-000004",
  applicant: BOB_ADDR,
  notice_id: "N-2026-01",
  land_details_uri: "doc:77aa88",
  claimed_far: "9",
  status: "REJECTED",
  verification_trail: [
    {
      officer: PREM_ADDR,
      sub_department: "planning",
      decision: "REJECT",
      remarks: "claimed floor area exceeds the notice ceiling",
      tx_id: tx(31),
      height: 6,
    },
  ],
  next_department_index: 0,
  submitted_at: 1700000500,
});

export const appVerified = ApplicationSchema.parse({
  application_id: "APP-000005",
  applicant: ALICE_ADDR,
  notice_id: "N-2026-01",
  land_details_uri: "doc:99cc00",
  claimed_far: "4",
  status: "VERIFIED",
  verification_trail: [
    approval("planning", PREM_ADDR, 41, 7),
    approval("revenue", ADMIN_ADDR, 42, 8),
    approval("survey", ADMIN_ADDR, 43, 9),
  ],
  next_department_index: 3,
  submitted_at: 1700000600,
});

export const appIssued = ApplicationSchema.parse({
  ...appVerified,
  application_id: "APP-000006",
  status: "DRC_ISSUED",
});

// -- tokens ---------------------------------------------------------------------

export const tokenLive = TokenSchema.parse({
  token_id: 1,
  drc_id: "DRC-000001",
  owner: ALICE_ADDR,
  uri: "doc:certificate-1",
  issuer_signature: "f0".repeat(64),
  burned: false,
  far_available: "2.5",
  claimed_far: "4",
  land_count: 2,
  lands: {
    "1": { plot_id: "P-101", area: "2", zone: "SZ-A" },
    "2": { plot_id: "P-102", area: "2", zone: "SZ-A" },
  },
  sending_zone: "SZ-A",
  issued_against: "APP-000006",
  approved_operator: null,
  eligible_for_burn: false,
});

export const tokenSpent = TokenSchema.parse({
  ...tokenLive,
  token_id: 2,
  drc_id: "DRC-000002",
  owner: BOB_ADDR,
  uri: "doc:certificate-2",
  far_available: "0",
  eligible_for_burn: true,
});

export const tokenBurned = TokenSchema.parse({
  ...tokenLive,
  token_id: 3,
  drc_id: "DRC-000003",
  owner: BOB_ADDR,
  uri: "doc:certificate-3",
  burned: true,
  far_available: "0",
  eligible_for_burn: false,
});

// -- users (raw store rows, as the status-filtered listing returns them) ----------

export const userPendingAdmin = UserSchema.parse({
  user_id: "U-000003",
  status: "PENDING_ADMIN",
  details: { name: "Casey Verified <casey@example.test>" },
  national_id_digest: "9e".repeat(32),
  reference_id: "4688197369935632",
  registered_at: 1700000050,
});

export const userActive = UserSchema.parse({
  user_id: "U-000001",
  status: "ACTIVE",
  address: ALICE_ADDR,
  details: { name: "Alice Holder" },
  reference_id: "1234567890123452",
  registered_at: 1700000010,
});

// -- roles ---------------------------------------------------------------------

export const roleRows = z.array(RoleAssignmentSchema).parse([
  {
    subject: ADMIN_ADDR,
    role: "ADMIN",
    sub_department: null,
    granted_by: ADMIN_ADDR,
    granted_at: 0,
  },
  {
    subject: PREM_ADDR,
    role: "OFFICER",
    sub_department: "planning",
    granted_by: ADMIN_ADDR,
    granted_at: 1700000150,
  },
]);

// -- provenance: a full certificate lifecycle -------------------------------------

export const fullProvenance = z.array(ProvenanceEventSchema).parse([
  { kind: "mint", token_id: 1, drc_id: "DRC-000001", owner: ALICE_ADDR, uri: "doc:certificate-1", tx_id: tx(51), height: 10 },
  { kind: "transfer", token_id: 1, from: ALICE_ADDR, to: BOB_ADDR, tx_id: tx(52), height: 11 },
  { kind: "utilize", token_id: 1, far_used: "1.5", receiving_zone: "RZ-A", approved_by: ADMIN_ADDR, tx_id: tx(53), height: 12 },
  { kind: "utilize", token_id: 1, far_used: "2.5", receiving_zone: "RZ-B", approved_by: ADMIN_ADDR, tx_id: tx(54), height: 13 },
  { kind: "burn", token_id: 1, drc_id: "DRC-000001", tx_id: tx(55), height: 14 },
]);
