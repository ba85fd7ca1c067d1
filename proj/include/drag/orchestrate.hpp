#pragma once

#include <string>
#include <vector>

namespace drag {

// Prompt texts are config assets loaded from a template directory; each
// template is a <name>.system.txt / <name>.user.txt pair.
struct PromptTemplates {
  std::string plan_system;
  std::string plan_user;
  std::string style_system;
  std::string style_user;
};

// Throws Error{MissingTemplate} naming the absent file.
PromptTemplates load_templates(const std::string& dir);

// Loads one arbitrary template pair (e.g. the verdict or extraction prompts).
std::string load_template_file(const std::string& dir, const std::string& name);

struct AgentFlags {
  bool planning = true;
  bool guidance = true;
};

struct PromptBundle {
  std::string plan_text;   // empty when planning is off
  std::string style_text;  // empty when guidance is off
  std::string sketch_ref;
  std::vector<std::string> reference_refs;  // retrieval rank order
  AgentFlags agent_flags;
};

// Template instantiated verbatim; the references only decide which
// attachments accompany the text.
std::string build_plan_prompt(const PromptTemplates& templates,
                              const std::string& sketch_ref,
                              const std::vector<std::string>& references);

// Throws Error{NoReferences} when the reference list is empty.
std::string build_style_prompt(const PromptTemplates& templates,
                               const std::vector<std::string>& references);

PromptBundle make_prompt_bundle(const PromptTemplates& templates,
                                const std::string& sketch_ref,
                                const std::vector<std::string>& references,
                                AgentFlags flags);

struct GenerationRequest {
  std::string system_text;
  std::string user_text;
  std::vector<std::string> attachments;  // sketch first, then references
  std::string target_model;
  std::string request_id;  // content hash; retries reuse it
};

GenerationRequest assemble_generation_request(const PromptBundle& bundle,
                                              const std::string& target_model);

std::string generation_request_to_json(const GenerationRequest& request);

// Image/chat generation client contract: POST {endpoint}/generate.
struct GenClientConfig {
  std::string endpoint;
  int timeout_ms = 60000;
  int retries = 1;
  std::string api_key;
};

struct GenerationResponse {
  std::string request_id;
  std::string artifact_ref;
  std::string status;
};

GenerationResponse submit_generation(const GenClientConfig& config,
                                     const GenerationRequest& request);

}  // namespace drag
