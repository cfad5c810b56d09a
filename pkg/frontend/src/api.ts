/**
 * Thin typed client for the registry REST API.
 *
 * Mutations carry per-call credentials in the body; nothing is cached or
 * stored here. Every response is parsed with the schema for its route, so
 * a shape change in the API fails loudly instead of rendering garbage.
 */

import { z } from "zod";
import {
  Application,
  ApplicationSchema,
  Credentials,
  Meta,
  MetaSchema,
  Notice,
  NoticeSchema,
  OutboxEntry,
  OutboxEntrySchema,
  PendingTx,
  PendingTxSchema,
  ProvenanceEvent,
  ProvenanceEventSchema,
  Receipt,
  ReceiptSchema,
  Registration,
  RegistrationSchema,
  RoleAssignment,
  RoleAssignmentSchema,
  Token,
  TokenSchema,
  User,
  UserSchema,
} from "./types.js";

/** API failure, preserving the machine code and human detail verbatim. */
export class ApiError extends Error {
  readonly code: string;
  readonly detail: string;
  readonly status: number;

  constructor(code: string, detail: string, status: number) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
    this.code = code;
    this.detail = detail;
    this.status = status;
  }
}

export interface ApiOptions {
  baseUrl: string;
  fetchImpl?: typeof fetch;
}

export class PortalApi {
  private readonly baseUrl: string;
  private readonly fetchImpl: typeof fetch;

  constructor(options: ApiOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.fetchImpl = options.fetchImpl ?? fetch;
  }

  private async request<T>(
    schema: z.ZodType<T>,
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      const code = typeof payload?.error === "string" ? payload.error : "HttpError";
      const detail = typeof payload?.detail === "string" ? payload.detail : response.statusText;
      throw new ApiError(code, detail, response.status);
    }
    return schema.parse(payload);
  }

  private get<T>(schema: z.ZodType<T>, path: string): Promise<T> {
    return this.request(schema, "GET", path);
  }

  private post<T>(schema: z.ZodType<T>, path: string, body: unknown): Promise<T> {
    return this.request(schema, "POST", path, body);
  }

  // -- identity ----------------------------------------------------------

  register(nationalId: string, details: Record<string, string>): Promise<Registration> {
    return this.post(RegistrationSchema, "/users", {
      national_id: nationalId,
      details,
    });
  }

  completeKyc(challengeId: string, otp: string, password: string): Promise<User> {
    return this.post(UserSchema, "/users/kyc", {
      challenge_id: challengeId,
      otp,
      password,
    });
  }

  getUser(userId: string): Promise<User> {
    return this.get(UserSchema, `/users/${encodeURIComponent(userId)}`);
  }

  listUsers(status?: string): Promise<User[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.get(z.array(UserSchema), `/users${query}`);
  }

  approveUser(creds: Credentials, targetUserId: string): Promise<PendingTx> {
    return this.post(
      PendingTxSchema,
      `/users/${encodeURIComponent(targetUserId)}/approve`,
      creds,
    );
  }

  outbox(to?: string): Promise<OutboxEntry[]> {
    const query = to ? `?to=${encodeURIComponent(to)}` : "";
    return this.get(z.array(OutboxEntrySchema), `/outbox${query}`);
  }

  // -- roles ---------------------------------------------------------------

  listRoles(): Promise<RoleAssignment[]> {
    return this.get(z.array(RoleAssignmentSchema), "/roles");
  }

  grantRole(
    creds: Credentials,
    subject: string,
    role: string,
    subDepartment?: string,
  ): Promise<PendingTx> {
    return this.post(PendingTxSchema, "/roles/grant", {
      ...creds,
      subject,
      role,
      sub_department: subDepartment ?? null,
    });
  }

  // -- notices and applications -------------------------------------------

  listNotices(): Promise<Notice[]> {
    return this.get(z.array(NoticeSchema), "/notices");
  }

  createNotice(
    creds: Credentials,
    noticeId: string,
    sendingZone: string,
    landDescription: unknown,
  ): Promise<PendingTx> {
    return this.post(PendingTxSchema, "/notices", {
      ...creds,
      notice_id: noticeId,
      sending_zone: sendingZone,
      land_description: landDescription,
    });
  }

  getApplication(applicationId: string): Promise<Application> {
    return this.get(
      ApplicationSchema,
      `/applications/${encodeURIComponent(applicationId)}`,
    );
  }

  listApplications(filter?: {
    status?: string;
    applicant?: string;
    department?: string;
  }): Promise<Application[]> {
    const params = new URLSearchParams();
    if (filter?.status) params.set("status", filter.status);
    if (filter?.applicant) params.set("applicant", filter.applicant);
    if (filter?.department) params.set("department", filter.department);
    const query = params.toString();
    return this.get(
      z.array(ApplicationSchema),
      `/applications${query ? "?" + query : ""}`,
    );
  }

  submitApplication(
    creds: Credentials,
    noticeId: string,
    claimedFar: string,
    landDetails: unknown,
  ): Promise<PendingTx> {
    return this.post(PendingTxSchema, "/applications", {
      ...creds,
      notice_id: noticeId,
      claimed_far: claimedFar,
      land_details: landDetails,
    });
  }

  verifyApplication(
    creds: Credentials,
    applicationId: string,
    decision: string,
    remarks: string,
  ): Promise<PendingTx> {
    return this.post(
      PendingTxSchema,
      `/applications/${encodeURIComponent(applicationId)}/verify`,
      { ...creds, decision, remarks },
    );
  }

  resubmitApplication(
    creds: Credentials,
    applicationId: string,
    landDetails: unknown,
  ): Promise<PendingTx> {
    return this.post(
      PendingTxSchema,
      `/applications/${encodeURIComponent(applicationId)}/resubmit`,
      { ...creds, land_details: landDetails },
    );
  }

  // -- certificates ----------------------------------------------------------

  getToken(tokenId: number): Promise<Token> {
    return this.get(TokenSchema, `/drcs/${tokenId}`);
  }

  listTokens(filter?: { owner?: string; eligible?: boolean }): Promise<Token[]> {
    const params = new URLSearchParams();
    if (filter?.owner) params.set("owner", filter.owner);
    if (filter?.eligible !== undefined) params.set("eligible", String(filter.eligible));
    const query = params.toString();
    return this.get(z.array(TokenSchema), `/drcs${query ? "?" + query : ""}`);
  }

  provenance(tokenId: number): Promise<ProvenanceEvent[]> {
    return this.get(z.array(ProvenanceEventSchema), `/drcs/${tokenId}/provenance`);
  }

  issueDrc(creds: Credentials, applicationId: string, lands: unknown[]): Promise<PendingTx> {
    return this.post(PendingTxSchema, "/drcs", {
      ...creds,
      application_id: applicationId,
      lands,
    });
  }

  transferToken(creds: Credentials, tokenId: number, toUserId: string): Promise<PendingTx> {
    return this.post(PendingTxSchema, `/drcs/${tokenId}/transfer`, {
      ...creds,
      to_user_id: toUserId,
    });
  }

  utilizeToken(
    creds: Credentials,
    tokenId: number,
    farUsed: string,
    receivingZone: string,
  ): Promise<PendingTx> {
    return this.post(PendingTxSchema, `/drcs/${tokenId}/utilize`, {
      ...creds,
      far_used: farUsed,
      receiving_zone: receivingZone,
    });
  }

  burnToken(creds: Credentials, tokenId: number): Promise<PendingTx> {
    return this.post(PendingTxSchema, `/drcs/${tokenId}/burn`, creds);
  }

  // -- chain ------------------------------------------------------------------

  receipt(txId: string): Promise<Receipt> {
    return this.get(ReceiptSchema, `/chain/receipts/${encodeURIComponent(txId)}`);
  }

  chainHeight(): Promise<{ height: number; head_hash: string }> {
    return this.get(
      z.strictObject({ height: z.number(), head_hash: z.string() }),
      "/chain/height",
    );
  }

  meta(): Promise<Meta> {
    return this.get(MetaSchema, "/meta");
  }
}
