/**
 * Portal controller: hash routing, polling, and form dispatch.
 *
 * The controller is instantiated with its document and API client, holds
 * no module-level state, and never mutates anything itself: every action
 * becomes an API call, and the page re-renders from fresh GET responses.
 * A session is only a choice of whose data to show; each mutating form
 * collects the password for that one action.
 */

import { ApiError, PortalApi } from "./api.js";
import {
  Session,
  adminQueues,
  buildSession,
  officerQueues,
  wallet,
} from "./model.js";
import {
  BannerState,
  renderApplicantView,
  renderApplicationDetail,
  renderBanner,
  renderLogin,
  renderNav,
  renderOfficerView,
  renderAdminView,
  renderTokenDetail,
} from "./render.js";
import { Credentials, Meta, PendingTx } from "./types.js";

export interface PortalOptions {
  document: Document;
  api: PortalApi;
  /** Refresh cadence in ms; 0 disables the timer (tests drive refresh()). */
  pollMs?: number;
  rootId?: string;
}

export interface PortalController {
  refresh(): Promise<void>;
  goto(hash: string): Promise<void>;
  stop(): void;
  readonly session: Session | null;
  readonly root: Element;
}

const DEFAULT_ROUTE = "/login";

const DECISION_BY_ACTION: Record<string, string> = {
  approve: "APPROVE",
  reject: "REJECT",
  send_back: "SEND_BACK",
};

class Controller implements PortalController {
  private readonly doc: Document;
  private readonly api: PortalApi;
  readonly root: Element;
  session: Session | null = null;

  private meta: Meta | null = null;
  private banner: BannerState | null = null;
  private pendingTx: string | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private refreshing = false;
  private readonly onClick: (event: Event) => void;
  private readonly onHashChange: () => void;

  constructor(options: PortalOptions) {
    this.doc = options.document;
    this.api = options.api;
    const root = this.doc.getElementById(options.rootId ?? "portal-root");
    if (!root) throw new Error("portal root element not found");
    this.root = root;

    this.onClick = (event) => {
      void this.handleClick(event);
    };
    this.root.addEventListener("click", this.onClick);

    this.onHashChange = () => {
      void this.refresh(true);
    };
    this.win?.addEventListener("hashchange", this.onHashChange);

    const pollMs = options.pollMs ?? 2000;
    if (pollMs > 0) {
      this.timer = setInterval(() => {
        void this.refresh().catch(() => undefined);
      }, pollMs);
    }
  }

  private get win(): Window | null {
    return this.doc.defaultView;
  }

  private get route(): string {
    const hash = this.win?.location.hash ?? "";
    return hash.startsWith("#/") ? hash.slice(1) : DEFAULT_ROUTE;
  }

  async goto(hash: string): Promise<void> {
    if (this.win) this.win.location.hash = hash;
    await this.refresh(true);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
    this.root.removeEventListener("click", this.onClick);
    this.win?.removeEventListener("hashchange", this.onHashChange);
  }

  // -- rendering ------------------------------------------------------------

  async refresh(force = false): Promise<void> {
    if (this.refreshing) return;
    if (!force && this.isTyping()) return;
    this.refreshing = true;
    try {
      await this.pollReceipt();
      let content: string;
      try {
        content = await this.routeContent();
      } catch (error) {
        content = `<section class="card"><p>${this.describeError(error)}</p></section>`;
      }
      if (!force && this.isTyping()) return;
      this.root.innerHTML =
        renderNav(this.session, this.route) +
        renderBanner(this.banner) +
        `<main>${content}</main>`;
    } finally {
      this.refreshing = false;
    }
  }

  /** True while the cursor sits in one of our form fields. */
  private isTyping(): boolean {
    const active = this.doc.activeElement;
    return Boolean(
      active &&
        this.root.contains(active) &&
        ["INPUT", "TEXTAREA", "SELECT"].includes(active.tagName),
    );
  }

  private async pollReceipt(): Promise<void> {
    if (!this.pendingTx) return;
    let receipt;
    try {
      receipt = await this.api.receipt(this.pendingTx);
    } catch {
      return; // not indexed yet; ask again next tick
    }
    if (receipt.status === "applied") {
      this.banner = {
        kind: "success",
        text: `transaction ${receipt.tx_id} committed at height ${receipt.height}`,
      };
      this.pendingTx = null;
    } else if (receipt.status === "failed") {
      this.banner = { kind: "error", text: `${receipt.error}: ${receipt.detail}` };
      this.pendingTx = null;
    }
  }

  private async requireMeta(): Promise<Meta> {
    if (!this.meta) this.meta = await this.api.meta();
    return this.meta;
  }

  private async routeContent(): Promise<string> {
    const route = this.route;
    if (route === "/login") {
      return renderLogin(await this.api.outbox());
    }

    const meta = await this.requireMeta();
    const session = this.session;
    if (!session) {
      return `<section class="card"><p>No session. <a href="#/login">Sign in</a> first.</p></section>`;
    }

    if (route === "/applicant") {
      const [notices, apps, tokens] = await Promise.all([
        this.api.listNotices(),
        session.address
          ? this.api.listApplications({ applicant: session.address })
          : Promise.resolve([]),
        session.address
          ? this.api.listTokens({ owner: session.address })
          : Promise.resolve([]),
      ]);
      return renderApplicantView(session, notices, apps, wallet(tokens, session));
    }

    if (route === "/officer") {
      const apps = await this.api.listApplications({ status: "SUBMITTED" });
      return renderOfficerView(officerQueues(apps, session, meta.departments));
    }

    if (route === "/admin") {
      const [pending, verified, eligible, notices, roles] = await Promise.all([
        this.api.listUsers("PENDING_ADMIN"),
        this.api.listApplications({ status: "VERIFIED" }),
        this.api.listTokens({ eligible: true }),
        this.api.listNotices(),
        this.api.listRoles(),
      ]);
      return renderAdminView(
        adminQueues(pending, verified, eligible),
        notices,
        roles,
        meta.departments,
      );
    }

    const appMatch = route.match(/^\/application\/(.+)$/);
    if (appMatch) {
      const app = await this.api.getApplication(decodeURIComponent(appMatch[1]));
      return renderApplicationDetail(app, session, meta.departments);
    }

    const tokenMatch = route.match(/^\/token\/(\d+)$/);
    if (tokenMatch) {
      const tokenId = Number(tokenMatch[1]);
      const [token, events] = await Promise.all([
        this.api.getToken(tokenId),
        this.api.provenance(tokenId),
      ]);
      return renderTokenDetail(token, events, session, meta.receiving_zones);
    }

    return `<section class="card"><p>Unknown page.</p></section>`;
  }

  // -- actions ----------------------------------------------------------------

  private async handleClick(event: Event): Promise<void> {
    const target = event.target as Element | null;
    if (!target) return;

    const anchor = target.closest?.('a[href^="#/"]');
    if (anchor) {
      event.preventDefault();
      await this.goto(anchor.getAttribute("href") ?? "#/login");
      return;
    }

    const button = target.closest?.("[data-action]") as HTMLElement | null;
    if (!button || button.hasAttribute("disabled")) return;
    const action = button.getAttribute("data-action") ?? "";
    const scope = button.closest("[data-scope]") ?? this.root;

    const read = (name: string): string => {
      const field = scope.querySelector(
        `[name="${name}"]`,
      ) as HTMLInputElement | null;
      return field ? field.value.trim() : "";
    };
    const readJson = (name: string): unknown => {
      const raw = read(name);
      if (!raw) return {};
      try {
        return JSON.parse(raw);
      } catch (error) {
        throw new Error(`${name} is not valid JSON: ${(error as Error).message}`);
      }
    };
    const creds = (): Credentials => {
      if (!this.session) throw new Error("open a session first");
      return { user_id: this.session.userId, password: read("password") };
    };
    const attr = (name: string): string => button.getAttribute(name) ?? "";

    try {
      switch (action) {
        case "login": {
          const user = await this.api.getUser(read("user_id"));
          this.session = buildSession(user);
          this.banner = {
            kind: "success",
            text: `session opened for ${user.user_id}`,
          };
          const home = this.session.isAdmin
            ? "#/admin"
            : this.session.officerDepartments.length
              ? "#/officer"
              : "#/applicant";
          await this.goto(home);
          return;
        }
        case "register": {
          const name = read("name");
          const registration = await this.api.register(
            read("national_id"),
            name ? { name } : {},
          );
          this.banner = {
            kind: "success",
            text:
              `registered ${registration.user_id}; verification code for ` +
              `challenge ${registration.challenge_id} delivered to the outbox`,
          };
          break;
        }
        case "kyc": {
          const user = await this.api.completeKyc(
            read("challenge_id"),
            read("otp"),
            read("password"),
          );
          this.banner = {
            kind: "success",
            text: `identity verified for ${user.user_id}; now ${user.status}`,
          };
          break;
        }
        case "approve_user":
          await this.submitTx(() =>
            this.api.approveUser(creds(), attr("data-user-id")),
          );
          return;
        case "grant_role":
          await this.submitTx(() =>
            this.api.grantRole(
              creds(),
              read("subject"),
              read("role"),
              read("sub_department") || undefined,
            ),
          );
          return;
        case "create_notice":
          await this.submitTx(() =>
            this.api.createNotice(
              creds(),
              read("notice_id"),
              read("sending_zone"),
              readJson("land_description"),
            ),
          );
          return;
        case "apply":
          await this.submitTx(() =>
            this.api.submitApplication(
              creds(),
              read("notice_id"),
              read("claimed_far"),
              readJson("land_details"),
            ),
          );
          return;
        case "resubmit":
          await this.submitTx(() =>
            this.api.resubmitApplication(
              creds(),
              attr("data-application-id"),
              readJson("land_details"),
            ),
          );
          return;
        case "approve":
        case "reject":
        case "send_back":
          await this.submitTx(() =>
            this.api.verifyApplication(
              creds(),
              attr("data-application-id"),
              DECISION_BY_ACTION[action],
              read("remarks"),
            ),
          );
          return;
        case "issue": {
          const lands = readJson("lands");
          if (!Array.isArray(lands)) throw new Error("lands must be a JSON array");
          await this.submitTx(() =>
            this.api.issueDrc(creds(), attr("data-application-id"), lands),
          );
          return;
        }
        case "transfer":
          await this.submitTx(() =>
            this.api.transferToken(
              creds(),
              Number(attr("data-token-id")),
              read("to_user_id"),
            ),
          );
          return;
        case "utilize":
          await this.submitTx(() =>
            this.api.utilizeToken(
              creds(),
              Number(attr("data-token-id")),
              read("far_used"),
              read("receiving_zone"),
            ),
          );
          return;
        case "burn":
          await this.submitTx(() =>
            this.api.burnToken(creds(), Number(attr("data-token-id"))),
          );
          return;
        default:
          return;
      }
    } catch (error) {
      this.banner = { kind: "error", text: this.describeError(error) };
    }
    await this.refresh(true);
  }

  /** Sends one command, then tracks its receipt until the chain decides. */
  private async submitTx(send: () => Promise<PendingTx>): Promise<void> {
    try {
      const tx = await send();
      this.pendingTx = tx.tx_id;
      this.banner = {
        kind: "info",
        text: `transaction ${tx.tx_id} submitted; waiting for commit`,
      };
    } catch (error) {
      this.banner = { kind: "error", text: this.describeError(error) };
    }
    await this.refresh(true);
  }

  /** API errors render code and detail exactly as the server sent them. */
  private describeError(error: unknown): string {
    if (error instanceof ApiError) return `${error.code}: ${error.detail}`;
    if (error instanceof Error) return error.message;
    return String(error);
  }
}

export function startPortal(options: PortalOptions): PortalController {
  return new Controller(options);
}

// Browser bootstrap: pick up the page's config global and mount. Test
// environments import this module without a document and are unaffected.
declare global {
  interface Window {
    TDR_PORTAL_BASE?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("portal-root")) {
  const baseUrl = window.TDR_PORTAL_BASE ?? "http://127.0.0.1:8545";
  const controller = startPortal({
    document,
    api: new PortalApi({ baseUrl }),
    pollMs: 2000,
  });
  void controller.refresh();
}
