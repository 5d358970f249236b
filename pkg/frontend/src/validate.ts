import { SEVERITY_SCALE, type HazardReport, type SeverityScale } from "./types.js";

// Client-side checks mirroring the server's invariants, so bad edits are
// blocked before a save round-trips.

export function severityError(value: number, scale: SeverityScale = SEVERITY_SCALE): string | null {
  if (!Number.isInteger(value)) {
    return `severity must be a whole number (got ${value})`;
  }
  if (value < scale.low || value > scale.high) {
    return `severity ${value} is outside the ${scale.low}–${scale.high} scale`;
  }
  return null;
}

export function reportErrors(report: HazardReport, scale: SeverityScale = SEVERITY_SCALE): string[] {
  const errors: string[] = [];
  for (const hazard of report.hazards) {
    if (!hazard.name.trim()) {
      errors.push(`hazard ${hazard.index}: name is blank`);
    }
    const severityProblem = severityError(hazard.severity, scale);
    if (severityProblem) {
      errors.push(`hazard ${hazard.index}: ${severityProblem}`);
    }
  }
  return errors;
}

export function approvalErrors(report: HazardReport | null, scale: SeverityScale = SEVERITY_SCALE): string[] {
  if (report === null) {
    return ["cannot approve a record without ground truth"];
  }
  const errors = reportErrors(report, scale);
  if (!report.summary.trim()) {
    errors.unshift("summary is required before approval");
  }
  return errors;
}
