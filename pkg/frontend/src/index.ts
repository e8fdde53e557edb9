export { EnvHandle, type EnvOptions } from "./env.js";
export {
  loadPolicy,
  parseWeights,
  MissingWeightsFileError,
  WeightsFormatError,
  DimensionMismatchError,
  type LoadedPolicy,
} from "./policy.js";
export {
  ACTION_COUNT,
  ClosedHandleError,
  ProtocolError,
  type Response,
  type StepInfo,
} from "./protocol.js";
