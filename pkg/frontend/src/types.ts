// Wire types mirroring the scenario service responses.

export type Gamma = 0 | 1;

export type Objective =
  | 'unconstrained'
  | 'risk_constrained'
  | 'risk_budget_constrained'
  | 'min_variance';

export type Stance = 'very_bearish' | 'bearish' | 'bullish' | 'very_bullish';

export type ViewKind = 'absolute' | 'relative';

export interface ScenarioViews {
  P: number[][];
  q: number[];
  kinds: ViewKind[];
  confidence?: number;
  omega?: number[][];
}

export interface ScenarioDoc {
  schema_version: number;
  market: {
    asset_labels?: string[];
    sigma: number[][];
    pi_c: number[];
    r_f: number;
    expected_market_return: number;
    sigma_m: number;
  };
  shadow_costs: {
    lambda: number[];
    Lambda: number[][];
    cross_cov: number[][];
    tau: number;
    random_mean?: { lambda_1: number[]; tau_1: number };
  };
  views?: ScenarioViews;
  sweeps?: { tau?: number[]; c?: number[]; gamma?: number[] };
}

export interface StoredScenarioMeta {
  id: string;
  revision: number;
  created_at: string;
  updated_at: string;
}

export interface ComputeParams {
  tau?: number;
  gamma?: Gamma;
  c?: number;
  q_overrides?: number[];
  P_overrides?: number[][];
  stances?: (Stance | null)[];
  objective?: Objective;
  sigma_cap?: number;
  info_set?: number[];
}

export interface AllocationBlock {
  feasible: boolean;
  weights: number[];
  assets: number[];
  return: number | null;
  risk: number | null;
  min_variance_risk?: number;
  two_fund?: { a: number; b: number };
}

export interface ComputeResult {
  scenario_id: string;
  revision: number;
  params_hash: string;
  asset_labels: string[];
  market: {
    delta: number;
    lambda_m: number;
    delta_lambda: number;
    w_capm: number[];
    w_incomplete: number[];
  };
  prior: { pi: number[]; sigma_gamma_diag: number[] };
  posterior: { mean: number[]; sigma_diag: number[] };
  views: { q: number[]; omega_diag: number[]; view_fit: number };
  allocation: AllocationBlock;
  baseline: AllocationBlock;
  deltas: { mean: number[]; weights: number[] };
}

export interface ServiceError {
  status: number;
  code: string;
  message: string;
  violations?: string[];
  current_revision?: number;
}
