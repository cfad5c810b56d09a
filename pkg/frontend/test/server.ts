/**
 * Spawns a real ledger node for the end-to-end suite: fresh store in a
 * temp directory, one-second block interval so commits land on their own,
 * and cheap key-derivation parameters to keep the run fast.
 */

import { execFile, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer, AddressInfo } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);
const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export interface LedgerServer {
  baseUrl: string;
  adminPassword: string;
  stop(): Promise<void>;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as AddressInfo).port;
      probe.close(() => resolve(port));
    });
  });
}

export async function startLedger(): Promise<LedgerServer> {
  const dir = mkdtempSync(join(tmpdir(), "tdr-portal-e2e-"));
  const port = await freePort();
  const adminPassword = "portal-e2e-admin-1";
  const configPath = join(dir, "tdr.conf");
  writeFileSync(
    configPath,
    [
      `data_dir=${join(dir, "store")}`,
      "api_host=127.0.0.1",
      `api_port=${port}`,
      "block_interval_seconds=1",
      "scrypt_n=256",
      `admin_password=${adminPassword}`,
      "",
    ].join("\n"),
  );

  await execFileAsync("tdr", ["--config", configPath, "init"]);

  const child: ChildProcess = spawn("tdr", ["--config", configPath, "serve"], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  let stderr = "";
  child.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`ledger exited before coming up:\n${stderr}`);
    }
    try {
      const response = await fetch(`${baseUrl}/chain/height`);
      if (response.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      child.kill("SIGKILL");
      throw new Error(`ledger did not come up within 30s:\n${stderr}`);
    }
    await sleep(200);
  }

  return {
    baseUrl,
    adminPassword,
    stop: () =>
      new Promise<void>((resolve) => {
        if (child.exitCode !== null) return resolve();
        child.once("exit", () => resolve());
        child.kill("SIGTERM");
        setTimeout(() => child.kill("SIGKILL"), 5_000).unref();
      }),
  };
}
