/** Thin typed client for the /v1 gateway.
 *
 * Every method returns the server's JSON untouched. Weight math, precedence,
 * and chain resolution all happen server-side; this file only moves bytes.
 */

import type {
  ApiError,
  ChainReport,
  DelegationList,
  DelegationScope,
  SurveyOutcome,
  SurveyResults,
  VoteReceipt,
} from "./types.js";

export class GatewayError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(body.error);
    this.name = "GatewayError";
  }
}

export interface ClientOptions {
  baseUrl: string;
  org: string;
  token: string;
  fetchImpl?: typeof fetch;
}

export class GatewayClient {
  private readonly base: string;
  private readonly org: string;
  private readonly token: string;
  private readonly fetchImpl: typeof fetch;

  constructor(opts: ClientOptions) {
    this.base = opts.baseUrl.replace(/\/+$/, "");
    this.org = opts.org;
    this.token = opts.token;
    this.fetchImpl = opts.fetchImpl ?? fetch;
  }

  private async request<T>(
    method: string,
    path: string,
    params?: Record<string, string>,
    body?: unknown,
  ): Promise<T> {
    let url = `${this.base}/v1/orgs/${encodeURIComponent(this.org)}${path}`;
    if (params) {
      url += `?${new URLSearchParams(params)}`;
    }
    const response = await this.fetchImpl(url, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const json = (await response.json()) as T | ApiError;
    if (!response.ok) {
      throw new GatewayError(response.status, json as ApiError);
    }
    return json as T;
  }

  delegations(participant: string): Promise<DelegationList> {
    return this.request("GET", "/delegations", { participant });
  }

  setDelegation(source: string, target: string, scope: DelegationScope): Promise<unknown> {
    return this.request("PUT", "/delegations", undefined, { source, target, scope });
  }

  chain(participant: string, issue: string): Promise<ChainReport> {
    return this.request("GET", "/awareness/chain", { participant, issue });
  }

  castVote(issue: string, options: string[]): Promise<VoteReceipt> {
    return this.request("POST", `/issues/${encodeURIComponent(issue)}/votes`, undefined, {
      options,
    });
  }

  /** Submit survey answers; a refusal comes back as data, not an exception,
   * because the blocked state is something the page renders. */
  async respondSurvey(instance: string, answers: Record<string, unknown>): Promise<SurveyOutcome> {
    try {
      const receipt = await this.request<SurveyOutcome & { instance: string; participant: string }>(
        "POST",
        `/surveys/${encodeURIComponent(instance)}/responses`,
        undefined,
        { answers },
      );
      return { ok: true, receipt };
    } catch (err) {
      if (err instanceof GatewayError) {
        return { ok: false, status: err.status, error: err.body };
      }
      throw err;
    }
  }

  surveyResults(instance: string): Promise<SurveyResults> {
    return this.request("GET", `/surveys/${encodeURIComponent(instance)}/results`);
  }
}
