/**
 * View model: everything the screens show, computed from API responses.
 *
 * Two rules hold throughout. Displayed status strings are the engine's
 * enum values unchanged (the badge label IS the status). And no state is
 * derived or mutated client-side: these helpers only reshape what GET
 * endpoints returned, deciding which actions may be offered for the
 * current state and session role.
 *
 * Action gating convention: an action a role can never perform is absent
 * from the set; an action the role has but the state forbids is present
 * and disabled, with the reason.
 */

import {
  APPLICATION_STATUSES,
  Application,
  ApplicationStatus,
  Token,
  USER_STATUSES,
  User,
  UserStatus,
} from "./types.js";

export interface Badge {
  label: string;
  tone: "pending" | "warning" | "danger" | "success" | "done";
}

/** One badge per application status; labels are the enum strings themselves. */
export const APPLICATION_BADGES: Record<ApplicationStatus, Badge> = {
  SUBMITTED: { label: "SUBMITTED", tone: "pending" },
  SENT_BACK_FOR_CORRECTION: { label: "SENT_BACK_FOR_CORRECTION", tone: "warning" },
  REJECTED: { label: "REJECTED", tone: "danger" },
  VERIFIED: { label: "VERIFIED", tone: "success" },
  DRC_ISSUED: { label: "DRC_ISSUED", tone: "done" },
};

export const USER_BADGES: Record<UserStatus, Badge> = {
  PENDING_KYC: { label: "PENDING_KYC", tone: "pending" },
  PENDING_ADMIN: { label: "PENDING_ADMIN", tone: "warning" },
  ACTIVE: { label: "ACTIVE", tone: "success" },
  REJECTED: { label: "REJECTED", tone: "danger" },
};

export function applicationBadge(status: ApplicationStatus): Badge {
  return APPLICATION_BADGES[status];
}

export function userBadge(status: UserStatus): Badge {
  return USER_BADGES[status];
}

/** Compile-time and test-time guarantee that the maps stay 1:1. */
export const BADGE_COVERAGE = {
  application: APPLICATION_STATUSES,
  user: USER_STATUSES,
} as const;

// -- session ----------------------------------------------------------------

export interface Session {
  userId: string;
  address: string | null;
  status: UserStatus;
  isAdmin: boolean;
  /** Departments this session may decide for, in pipeline order. */
  officerDepartments: string[];
}

export function buildSession(user: User): Session {
  const roles = user.roles ?? [];
  return {
    userId: user.user_id,
    address: user.address ?? null,
    status: user.status,
    isAdmin: roles.some((r) => r.role === "ADMIN"),
    officerDepartments: roles
      .filter((r) => r.role === "OFFICER" && r.sub_department)
      .map((r) => r.sub_department as string),
  };
}

// -- action gating -----------------------------------------------------------

export interface ActionGate {
  enabled: boolean;
  reason?: string;
}

export type ActionSet = Record<string, ActionGate>;

const ALLOWED = { enabled: true } as const;

function denied(reason: string): ActionGate {
  return { enabled: false, reason };
}

/**
 * Actions offered on one application. Officers only ever see decision
 * actions for the department the item is currently waiting on, so a row
 * in a stale queue simply loses them on the next poll.
 */
export function applicationActions(
  app: Application,
  session: Session,
  departments: string[],
): ActionSet {
  const actions: ActionSet = {};
  const pendingDept =
    app.status === "SUBMITTED" ? departments[app.next_department_index] : null;

  if (session.address && session.address === app.applicant) {
    actions.resubmit =
      app.status === "SENT_BACK_FOR_CORRECTION"
        ? ALLOWED
        : denied(`application is ${app.status}`);
  }
  if (pendingDept && session.officerDepartments.includes(pendingDept)) {
    actions.approve = ALLOWED;
    actions.reject = ALLOWED;
    actions.send_back = ALLOWED;
  }
  if (session.isAdmin) {
    actions.issue =
      app.status === "VERIFIED" ? ALLOWED : denied(`application is ${app.status}`);
  }
  return actions;
}

/** Actions offered on one certificate token. */
export function tokenActions(token: Token, session: Session): ActionSet {
  const actions: ActionSet = {};
  const owns = session.address !== null && session.address === token.owner;

  if (owns) {
    actions.transfer = token.burned ? denied("token is burned") : ALLOWED;
  }
  if (session.officerDepartments.length > 0) {
    actions.utilize = token.burned
      ? denied("token is burned")
      : token.far_available === "0"
        ? denied("no FAR available")
        : ALLOWED;
  }
  if (session.isAdmin) {
    actions.burn = token.burned
      ? denied("token is burned")
      : token.eligible_for_burn
        ? ALLOWED
        : denied(`${token.far_available} FAR still available`);
  }
  return actions;
}

// -- queues -------------------------------------------------------------------

/**
 * The verification queue one officer works: applications whose pending
 * department is one they hold, grouped by department in pipeline order.
 */
export function officerQueues(
  apps: Application[],
  session: Session,
  departments: string[],
): Map<string, Application[]> {
  const queues = new Map<string, Application[]>();
  for (const dept of departments) {
    if (!session.officerDepartments.includes(dept)) continue;
    queues.set(
      dept,
      apps
        .filter(
          (a) =>
            a.status === "SUBMITTED" &&
            departments[a.next_department_index] === dept,
        )
        .sort((a, b) => a.application_id.localeCompare(b.application_id)),
    );
  }
  return queues;
}

export interface AdminQueues {
  onboarding: User[];
  issuance: Application[];
  burnEligible: Token[];
}

export function adminQueues(
  users: User[],
  verifiedApps: Application[],
  eligibleTokens: Token[],
): AdminQueues {
  return {
    onboarding: users.filter((u) => u.status === "PENDING_ADMIN"),
    issuance: verifiedApps.filter((a) => a.status === "VERIFIED"),
    burnEligible: eligibleTokens.filter((t) => t.eligible_for_burn && !t.burned),
  };
}

/** Wallet: the session's live tokens, as returned by the owner filter. */
export function wallet(tokens: Token[], session: Session): Token[] {
  if (!session.address) return [];
  return tokens.filter((t) => !t.burned && t.owner === session.address);
}
