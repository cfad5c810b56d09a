/**
 * HTML renderers: pure functions from view-model data to markup strings.
 *
 * Values from the API land in the page unchanged (escaped, never
 * reformatted). Buttons carry data-action attributes; the controller owns
 * a single delegated click handler, so none of this markup has inline
 * script. Every mutating form carries its own password field: passwords
 * are entered per action and never kept.
 */

import {
  AdminQueues,
  Session,
  applicationBadge,
  applicationActions,
  tokenActions,
  userBadge,
} from "./model.js";
import {
  Application,
  Notice,
  OutboxEntry,
  ProvenanceEvent,
  RoleAssignment,
  Token,
  User,
} from "./types.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const esc = escapeHtml;

function badgeHtml(badge: { label: string; tone: string }): string {
  return `<span class="badge badge-${badge.tone}">${esc(badge.label)}</span>`;
}

export function applicationBadgeHtml(status: Application["status"]): string {
  return badgeHtml(applicationBadge(status));
}

export function userBadgeHtml(status: User["status"]): string {
  return badgeHtml(userBadge(status));
}

/**
 * One action button. Disabled state carries the reason in both the title
 * and a data attribute, so tests can read the full disabled-action set.
 */
export function actionButton(
  action: string,
  label: string,
  gate: { enabled: boolean; reason?: string },
  data: Record<string, string | number> = {},
): string {
  const attrs = Object.entries(data)
    .map(([key, value]) => ` data-${key}="${esc(value)}"`)
    .join("");
  if (gate.enabled) {
    return `<button type="button" data-action="${esc(action)}"${attrs}>${esc(label)}</button>`;
  }
  const reason = gate.reason ?? "not available";
  return (
    `<button type="button" data-action="${esc(action)}"${attrs} disabled` +
    ` data-disabled-reason="${esc(reason)}" title="${esc(reason)}">${esc(label)}</button>`
  );
}

function passwordField(scope: string): string {
  return (
    `<label>password <input type="password" name="password"` +
    ` data-password-for="${esc(scope)}" autocomplete="off"></label>`
  );
}

function card(title: string, body: string, id?: string): string {
  const idAttr = id ? ` id="${esc(id)}"` : "";
  return `<section class="card"${idAttr}><h2>${esc(title)}</h2>${body}</section>`;
}

function emptyRow(colspan: number, text: string): string {
  return `<tr class="empty"><td colspan="${colspan}">${esc(text)}</td></tr>`;
}

// -- banners ---------------------------------------------------------------

export interface BannerState {
  kind: "error" | "info" | "success";
  text: string;
}

export function renderBanner(banner: BannerState | null): string {
  if (!banner) return "";
  return `<div class="banner banner-${banner.kind}">${esc(banner.text)}</div>`;
}

// -- login and onboarding ----------------------------------------------------

export function renderLogin(outbox: OutboxEntry[]): string {
  const sessionForm = `
    <form data-scope="login">
      <label>user id <input name="user_id" placeholder="U-000001 or admin"></label>
      <button type="button" data-action="login">Open session</button>
    </form>
    <p class="hint">A session only selects whose data to show. Every action
    that writes asks for your password again.</p>`;

  const registerForm = `
    <form data-scope="register">
      <label>national id <input name="national_id" maxlength="12"></label>
      <label>full name <input name="name"></label>
      <button type="button" data-action="register">Register</button>
    </form>`;

  const kycForm = `
    <form data-scope="kyc">
      <label>challenge id <input name="challenge_id"></label>
      <label>one-time code <input name="otp" maxlength="6"></label>
      <label>choose password <input type="password" name="password" autocomplete="off"></label>
      <button type="button" data-action="kyc">Verify</button>
    </form>`;

  const outboxRows = outbox.length
    ? outbox
        .map(
          (entry) =>
            `<tr><td>${esc(entry.to)}</td><td>${esc(entry.subject)}</td>` +
            `<td>${esc(entry.body)}</td></tr>`,
        )
        .join("")
    : emptyRow(3, "no messages yet");
  const outboxPanel = `
    <table>
      <thead><tr><th>to</th><th>subject</th><th>message</th></tr></thead>
      <tbody>${outboxRows}</tbody>
    </table>
    <p class="hint">Development outbox: where this demo delivers one-time codes.</p>`;

  return (
    card("Open a session", sessionForm, "login") +
    card("New registration", registerForm, "register") +
    card("Complete verification", kycForm, "kyc") +
    card("Message outbox", outboxPanel, "outbox")
  );
}

// -- applicant ----------------------------------------------------------------

export function renderApplicantView(
  session: Session,
  notices: Notice[],
  apps: Application[],
  tokens: Token[],
): string {
  const noticeRows = notices.length
    ? notices
        .map((n) => {
          const state = n.open ? "open" : "closed";
          return (
            `<tr><td>${esc(n.notice_id)}</td><td>${esc(n.sending_zone)}</td>` +
            `<td>${esc(n.land_description_uri)}</td><td>${esc(state)}</td></tr>`
          );
        })
        .join("")
    : emptyRow(4, "no acquisition notices published");
  const noticesPanel = `
    <table>
      <thead><tr><th>notice</th><th>sending zone</th><th>land description</th><th>state</th></tr></thead>
      <tbody>${noticeRows}</tbody>
    </table>`;

  const applyForm =
    session.status === "ACTIVE"
      ? `
    <form data-scope="apply">
      <label>notice id <input name="notice_id"></label>
      <label>claimed FAR <input name="claimed_far" placeholder="4 or 2.5"></label>
      <label>land details (JSON) <textarea name="land_details">{}</textarea></label>
      ${passwordField("apply")}
      <button type="button" data-action="apply">Submit application</button>
    </form>`
      : `<p class="callout">This account is ${userBadgeHtml(session.status)};
         applications open up once it is active.</p>`;

  const appRows = apps.length
    ? apps
        .map(
          (app) =>
            `<tr><td><a href="#/application/${esc(app.application_id)}">` +
            `${esc(app.application_id)}</a></td>` +
            `<td>${esc(app.notice_id)}</td>` +
            `<td class="num">${esc(app.claimed_far)}</td>` +
            `<td>${applicationBadgeHtml(app.status)}</td></tr>`,
        )
        .join("")
    : emptyRow(4, "no applications filed");
  const appsPanel = `
    <table>
      <thead><tr><th>application</th><th>notice</th><th>claimed FAR</th><th>status</th></tr></thead>
      <tbody>${appRows}</tbody>
    </table>`;

  return (
    card("Acquisition notices", noticesPanel, "notices") +
    card("Apply against a notice", applyForm, "apply") +
    card("My applications", appsPanel, "my-applications") +
    card("My certificates", renderWalletTable(tokens), "wallet")
  );
}

export function renderWalletTable(tokens: Token[]): string {
  const rows = tokens.length
    ? tokens
        .map(
          (t) =>
            `<tr><td><a href="#/token/${t.token_id}">#${t.token_id}</a></td>` +
            `<td class="mono">${esc(t.drc_id)}</td>` +
            `<td class="num">${esc(t.far_available)}</td>` +
            `<td class="num">${esc(t.claimed_far)}</td>` +
            `<td>${esc(t.sending_zone)}</td></tr>`,
        )
        .join("")
    : emptyRow(5, "no certificates held");
  return `
    <table>
      <thead><tr><th>token</th><th>certificate id</th><th>FAR available</th><th>FAR claimed</th><th>zone</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

// -- application detail ----------------------------------------------------------

export function renderApplicationDetail(
  app: Application,
  session: Session,
  departments: string[],
): string {
  const actions = applicationActions(app, session, departments);
  const pendingDept =
    app.status === "SUBMITTED" ? departments[app.next_department_index] : null;

  const fields = `
    <dl>
      <dt>application</dt><dd>${esc(app.application_id)}</dd>
      <dt>applicant</dt><dd class="mono">${esc(app.applicant)}</dd>
      <dt>notice</dt><dd>${esc(app.notice_id)}</dd>
      <dt>claimed FAR</dt><dd class="num">${esc(app.claimed_far)}</dd>
      <dt>land details</dt><dd class="mono">${esc(app.land_details_uri)}</dd>
      <dt>status</dt><dd>${applicationBadgeHtml(app.status)}</dd>
      ${pendingDept ? `<dt>waiting on</dt><dd>${esc(pendingDept)}</dd>` : ""}
    </dl>`;

  const trailRows = app.verification_trail.length
    ? app.verification_trail
        .map(
          (entry) =>
            `<tr><td>${esc(entry.sub_department)}</td><td>${esc(entry.decision)}</td>` +
            `<td class="mono">${esc(entry.officer)}</td><td>${esc(entry.remarks)}</td>` +
            `<td class="num">${entry.height}</td></tr>`,
        )
        .join("")
    : emptyRow(5, "no decisions recorded yet");
  const trail = `
    <table>
      <thead><tr><th>department</th><th>decision</th><th>officer</th><th>remarks</th><th>block</th></tr></thead>
      <tbody>${trailRows}</tbody>
    </table>`;

  let panels = card("Application", fields, "application") + card("Verification trail", trail, "trail");

  if ("resubmit" in actions) {
    const lastSendBack = [...app.verification_trail]
      .reverse()
      .find((entry) => entry.decision === "SEND_BACK");
    const remarks = lastSendBack
      ? `<p class="callout">Correction requested by ${esc(lastSendBack.sub_department)}:
         ${esc(lastSendBack.remarks)}</p>`
      : "";
    const form = `
      ${remarks}
      <form data-scope="resubmit">
        <label>corrected land details (JSON)
          <textarea name="land_details">{}</textarea></label>
        ${passwordField("resubmit")}
        ${actionButton("resubmit", "Resubmit", actions.resubmit, {
          "application-id": app.application_id,
        })}
      </form>`;
    panels += card("Resubmit", form, "resubmit");
  }

  if ("approve" in actions) {
    const form = `
      <form data-scope="decision">
        <label>remarks <input name="remarks"></label>
        ${passwordField("decision")}
        ${actionButton("approve", "Approve", actions.approve, {
          "application-id": app.application_id,
        })}
        ${actionButton("reject", "Reject", actions.reject, {
          "application-id": app.application_id,
        })}
        ${actionButton("send_back", "Send back", actions.send_back, {
          "application-id": app.application_id,
        })}
      </form>`;
    panels += card(`Decision (${pendingDept})`, form, "decision");
  }

  if ("issue" in actions) {
    const form = `
      <form data-scope="issue">
        <label>land parcels (JSON array)
          <textarea name="lands">[{"plot_id": "P-1", "area": "1", "zone": "SZ-A"}]</textarea></label>
        ${passwordField("issue")}
        ${actionButton("issue", "Issue certificate", actions.issue, {
          "application-id": app.application_id,
        })}
      </form>`;
    panels += card("Issue certificate", form, "issue");
  }

  return panels;
}

// -- officer ---------------------------------------------------------------------

export function renderOfficerView(queues: Map<string, Application[]>): string {
  if (queues.size === 0) {
    return card("Verification queue", `<p class="hint">This session holds no officer department.</p>`);
  }
  let panels = "";
  for (const [dept, apps] of queues) {
    const rows = apps.length
      ? apps
          .map(
            (app) =>
              `<tr><td><a href="#/application/${esc(app.application_id)}">` +
              `${esc(app.application_id)}</a></td>` +
              `<td class="mono">${esc(app.applicant)}</td>` +
              `<td>${esc(app.notice_id)}</td>` +
              `<td class="num">${esc(app.claimed_far)}</td>` +
              `<td class="num">${app.verification_trail.length}</td></tr>`,
          )
          .join("")
      : emptyRow(5, "queue is empty");
    const table = `
      <table>
        <thead><tr><th>application</th><th>applicant</th><th>notice</th><th>claimed FAR</th><th>decisions so far</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <p class="hint">Open an application to record a decision.</p>`;
    panels += card(`Queue: ${dept}`, table, `queue-${dept}`);
  }
  return panels;
}

// -- admin --------------------------------------------------------------------------

export function renderAdminView(
  queues: AdminQueues,
  notices: Notice[],
  roles: RoleAssignment[],
  departments: string[],
): string {
  const onboardingRows = queues.onboarding.length
    ? queues.onboarding
        .map((user) => {
          const name = user.details && "name" in user.details ? String(user.details.name) : "";
          return (
            `<tr><td>${esc(user.user_id)}</td><td>${esc(name)}</td>` +
            `<td>${userBadgeHtml(user.status)}</td>` +
            `<td><form data-scope="approve-user">${passwordField("approve-user")}` +
            actionButton("approve_user", "Approve", { enabled: true }, { "user-id": user.user_id }) +
            `</form></td></tr>`
          );
        })
        .join("")
    : emptyRow(4, "nobody awaiting approval");
  const onboarding = `
    <table>
      <thead><tr><th>user</th><th>name</th><th>status</th><th></th></tr></thead>
      <tbody>${onboardingRows}</tbody>
    </table>`;

  const issuanceRows = queues.issuance.length
    ? queues.issuance
        .map(
          (app) =>
            `<tr><td><a href="#/application/${esc(app.application_id)}">` +
            `${esc(app.application_id)}</a></td>` +
            `<td class="mono">${esc(app.applicant)}</td>` +
            `<td class="num">${esc(app.claimed_far)}</td>` +
            `<td>${applicationBadgeHtml(app.status)}</td></tr>`,
        )
        .join("")
    : emptyRow(4, "nothing verified and unissued");
  const issuance = `
    <table>
      <thead><tr><th>application</th><th>applicant</th><th>claimed FAR</th><th>status</th></tr></thead>
      <tbody>${issuanceRows}</tbody>
    </table>
    <p class="hint">Open a verified application to issue its certificate.</p>`;

  const burnRows = queues.burnEligible.length
    ? queues.burnEligible
        .map(
          (t) =>
            `<tr><td><a href="#/token/${t.token_id}">#${t.token_id}</a></td>` +
            `<td class="mono">${esc(t.owner)}</td>` +
            `<td class="num">${esc(t.far_available)}</td>` +
            `<td class="num">${esc(t.claimed_far)}</td></tr>`,
        )
        .join("")
    : emptyRow(4, "no certificate is fully utilized");
  const burnable = `
    <table>
      <thead><tr><th>token</th><th>owner</th><th>FAR available</th><th>FAR claimed</th></tr></thead>
      <tbody>${burnRows}</tbody>
    </table>
    <p class="hint">Open a token to retire it.</p>`;

  const noticeForm = `
    <form data-scope="create-notice">
      <label>notice id <input name="notice_id"></label>
      <label>sending zone <input name="sending_zone"></label>
      <label>land description (JSON) <textarea name="land_description">{}</textarea></label>
      ${passwordField("create-notice")}
      <button type="button" data-action="create_notice">Publish notice</button>
    </form>
    <p class="hint">Existing: ${
      notices.map((n) => esc(n.notice_id)).join(", ") || "none"
    }</p>`;

  const roleRows = roles.length
    ? roles
        .map(
          (r) =>
            `<tr><td class="mono">${esc(r.subject)}</td><td>${esc(r.role)}</td>` +
            `<td>${esc(r.sub_department ?? "")}</td></tr>`,
        )
        .join("")
    : emptyRow(3, "no grants");
  const rolesPanel = `
    <table>
      <thead><tr><th>subject</th><th>role</th><th>department</th></tr></thead>
      <tbody>${roleRows}</tbody>
    </table>
    <form data-scope="grant-role">
      <label>user id or address <input name="subject"></label>
      <label>role
        <select name="role"><option>OFFICER</option><option>ADMIN</option></select></label>
      <label>department (for OFFICER)
        <select name="sub_department"><option value=""></option>${departments
          .map((d) => `<option>${esc(d)}</option>`)
          .join("")}</select></label>
      ${passwordField("grant-role")}
      <button type="button" data-action="grant_role">Grant</button>
    </form>`;

  return (
    card("Onboarding queue", onboarding, "onboarding") +
    card("Ready for issuance", issuance, "issuance") +
    card("Eligible for burn", burnable, "burn-eligible") +
    card("Publish acquisition notice", noticeForm, "create-notice") +
    card("Role grants", rolesPanel, "roles")
  );
}

// -- token detail ------------------------------------------------------------------

const EVENT_DETAIL: { [kind: string]: (event: ProvenanceEvent) => string } = {
  mint: (e) => (e.kind === "mint" ? `to ${e.owner}` : ""),
  transfer: (e) => (e.kind === "transfer" ? `${e.from} to ${e.to}` : ""),
  utilize: (e) =>
    e.kind === "utilize" ? `${e.far_used} FAR in ${e.receiving_zone}` : "",
  burn: () => "certificate retired",
  recover: (e) => (e.kind === "recover" ? `${e.from} to ${e.to}` : ""),
};

export function renderProvenance(events: ProvenanceEvent[]): string {
  const rows = events.length
    ? events
        .map(
          (event) =>
            `<tr><td><span class="event event-${esc(event.kind)}">${esc(event.kind)}</span></td>` +
            `<td class="mono">${esc(EVENT_DETAIL[event.kind](event))}</td>` +
            `<td class="num">${event.height}</td></tr>`,
        )
        .join("")
    : emptyRow(3, "no events");
  return `
    <table>
      <thead><tr><th>event</th><th>detail</th><th>block</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

export function renderTokenDetail(
  token: Token,
  events: ProvenanceEvent[],
  session: Session,
  receivingZones: string[],
): string {
  const actions = tokenActions(token, session);

  const fields = `
    <dl>
      <dt>token</dt><dd>#${token.token_id}${token.burned ? " (burned)" : ""}</dd>
      <dt>certificate id</dt><dd class="mono">${esc(token.drc_id)}</dd>
      <dt>owner</dt><dd class="mono">${esc(token.owner)}</dd>
      <dt>FAR available</dt><dd class="num">${esc(token.far_available)}</dd>
      <dt>FAR claimed</dt><dd class="num">${esc(token.claimed_far)}</dd>
      <dt>sending zone</dt><dd>${esc(token.sending_zone)}</dd>
      <dt>issued against</dt><dd><a href="#/application/${esc(token.issued_against)}">${esc(
        token.issued_against,
      )}</a></dd>
      <dt>document</dt><dd class="mono">${esc(token.uri)}</dd>
    </dl>
    <h3>Parcels</h3>
    <table>
      <thead><tr><th>plot</th><th>area</th><th>zone</th></tr></thead>
      <tbody>${Object.entries(token.lands)
        .sort(([a], [b]) => Number(a) - Number(b))
        .map(
          ([, land]) =>
            `<tr><td>${esc(land.plot_id)}</td><td class="num">${esc(land.area)}</td>` +
            `<td>${esc(land.zone)}</td></tr>`,
        )
        .join("")}</tbody>
    </table>`;

  let panels = card(`Certificate #${token.token_id}`, fields, "token");

  if ("transfer" in actions) {
    const form = `
      <form data-scope="transfer">
        <label>recipient user id <input name="to_user_id"></label>
        ${passwordField("transfer")}
        ${actionButton("transfer", "Transfer", actions.transfer, {
          "token-id": token.token_id,
        })}
      </form>`;
    panels += card("Transfer", form, "transfer");
  }

  if ("utilize" in actions) {
    const form = `
      <form data-scope="utilize">
        <label>FAR to use <input name="far_used"></label>
        <label>receiving zone
          <select name="receiving_zone">${receivingZones
            .map((z) => `<option>${esc(z)}</option>`)
            .join("")}</select></label>
        ${passwordField("utilize")}
        ${actionButton("utilize", "Record utilization", actions.utilize, {
          "token-id": token.token_id,
        })}
      </form>`;
    panels += card("Utilize", form, "utilize");
  }

  if ("burn" in actions) {
    const form = `
      <form data-scope="burn">
        ${passwordField("burn")}
        ${actionButton("burn", "Burn certificate", actions.burn, {
          "token-id": token.token_id,
        })}
      </form>`;
    panels += card("Burn", form, "burn");
  }

  panels += card("Provenance", renderProvenance(events), "provenance");
  return panels;
}

// -- shell ------------------------------------------------------------------------

export function renderNav(session: Session | null, route: string): string {
  const tabs: Array<[string, string]> = [];
  if (session) {
    tabs.push(["#/applicant", "Applicant"]);
    if (session.officerDepartments.length > 0) tabs.push(["#/officer", "Officer"]);
    if (session.isAdmin) tabs.push(["#/admin", "Admin"]);
  }
  tabs.push(["#/login", session ? "Switch user" : "Sign in"]);
  const links = tabs
    .map(([href, label]) => {
      const active = route === href.slice(1) ? ` class="active"` : "";
      return `<a href="${href}"${active}>${esc(label)}</a>`;
    })
    .join("");
  const who = session
    ? `<span class="who">${esc(session.userId)}${
        session.address ? ` <span class="mono">${esc(session.address)}</span>` : ""
      }</span>`
    : "";
  return `<nav>${links}${who}</nav>`;
}
