#include "drag/orchestrate.hpp"

#include <filesystem>

#include "drag/binio.hpp"
#include "drag/errors.hpp"
#include "drag/hash.hpp"
#include "json.hpp"

namespace drag {

std::string load_template_file(const std::string& dir, const std::string& name) {
  std::filesystem::path path = std::filesystem::path(dir) / name;
  if (!std::filesystem::exists(path))
    throw_error(ErrorKind::MissingTemplate, "template file '" + path.string() +
                                                "' not found");
  return read_file_bytes(path.string());
}

PromptTemplates load_templates(const std::string& dir) {
  PromptTemplates t;
  t.plan_system = load_template_file(dir, "plan.system.txt");
  t.plan_user = load_template_file(dir, "plan.user.txt");
  t.style_system = load_template_file(dir, "style.system.txt");
  t.style_user = load_template_file(dir, "style.user.txt");
  return t;
}

std::string build_plan_prompt(const PromptTemplates& templates,
                              const std::string& /*sketch_ref*/,
                              const std::vector<std::string>& /*references*/) {
  return templates.plan_system + "\n\n" + templates.plan_user;
}

std::string build_style_prompt(const PromptTemplates& templates,
                               const std::vector<std::string>& references) {
  if (references.empty())
    throw_error(ErrorKind::NoReferences,
                "visual guidance needs at least one reference");
  return templates.style_system + "\n\n" + templates.style_user;
}

PromptBundle make_prompt_bundle(const PromptTemplates& templates,
                                const std::string& sketch_ref,
                                const std::vector<std::string>& references,
                                AgentFlags flags) {
  PromptBundle bundle;
  bundle.sketch_ref = sketch_ref;
  bundle.reference_refs = references;
  bundle.agent_flags = flags;
  if (flags.planning)
    bundle.plan_text = build_plan_prompt(templates, sketch_ref, references);
  if (flags.guidance)
    bundle.style_text = build_style_prompt(templates, references);
  return bundle;
}

GenerationRequest assemble_generation_request(const PromptBundle& bundle,
                                              const std::string& target_model) {
  GenerationRequest request;
  request.target_model = target_model;
  request.user_text = bundle.plan_text;
  if (!bundle.plan_text.empty() && !bundle.style_text.empty())
    request.user_text += "\n\n---\n\n";
  request.user_text += bundle.style_text;
  request.attachments.push_back(bundle.sketch_ref);
  for (const auto& ref : bundle.reference_refs)
    request.attachments.push_back(ref);

  nlohmann::ordered_json j;
  j["model"] = request.target_model;
  j["system"] = request.system_text;
  j["user"] = request.user_text;
  j["attachments"] = request.attachments;
  request.request_id = to_hex64(fnv1a64(j.dump()));
  return request;
}

std::string generation_request_to_json(const GenerationRequest& request) {
  nlohmann::ordered_json j;
  j["request_id"] = request.request_id;
  j["model"] = request.target_model;
  j["system"] = request.system_text;
  j["user"] = request.user_text;
  j["attachments"] = request.attachments;
  return j.dump();
}

}  // namespace drag
