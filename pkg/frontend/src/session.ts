/** Session context and role gating. Views are strictly role-filtered. */

import type { Role } from "./types.js";

export interface SessionContext {
  token: string;
  role: Role;
  displayName: string;
}

export type Route = "upload" | "studies" | "feedback" | "review" | "review-detail";

const OPERATOR_ROUTES: Route[] = ["upload", "studies", "feedback"];
const SPECIALIST_ROUTES: Route[] = ["review", "review-detail"];

export function allowedRoutes(role: Role): Route[] {
  return role === "operator" ? [...OPERATOR_ROUTES] : [...SPECIALIST_ROUTES];
}

export function canAccess(route: Route, role: Role): boolean {
  return allowedRoutes(role).includes(route);
}
