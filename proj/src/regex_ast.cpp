#include <algorithm>
#include <functional>

#include "recount/errors.hpp"
#include "recount/regex.hpp"

namespace recount {

NodePtr make_epsilon() {
  static const NodePtr eps = std::make_shared<const Node>();
  return eps;
}

NodePtr make_class(const CharClass& cls) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Class;
  n->cls = cls;
  return n;
}

NodePtr make_concat(NodePtr left, NodePtr right) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Concat;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

NodePtr make_alt(NodePtr left, NodePtr right) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Alt;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

NodePtr make_star(NodePtr child) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Star;
  n->left = std::move(child);
  return n;
}

NodePtr make_repeat(NodePtr child, std::uint32_t min, std::uint32_t max, InstanceId id) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Repeat;
  n->left = std::move(child);
  n->min = min;
  n->max = max;
  n->instance = id;
  return n;
}

namespace {

// Printing contexts, loosest first.
enum class Ctx { Alt, Concat, Operand };

void print(const NodePtr& n, Ctx ctx, std::string& out);

void print_wrapped(const NodePtr& n, std::string& out) {
  out += '(';
  print(n, Ctx::Alt, out);
  out += ')';
}

void print(const NodePtr& n, Ctx ctx, std::string& out) {
  switch (n->kind) {
    case NodeKind::Epsilon:
      if (ctx != Ctx::Alt) out += "()";
      return;
    case NodeKind::Class:
      out += n->cls.to_string();
      return;
    case NodeKind::Concat:
      if (ctx == Ctx::Operand) return print_wrapped(n, out);
      // Concatenation parses left-associatively.
      if (n->left->kind == NodeKind::Alt) {
        print_wrapped(n->left, out);
      } else {
        print(n->left, Ctx::Concat, out);
      }
      if (n->right->kind == NodeKind::Alt || n->right->kind == NodeKind::Concat) {
        print_wrapped(n->right, out);
      } else {
        print(n->right, Ctx::Concat, out);
      }
      return;
    case NodeKind::Alt:
      if (ctx != Ctx::Alt) return print_wrapped(n, out);
      if (n->left->kind == NodeKind::Alt) {
        print(n->left, Ctx::Alt, out);
      } else if (n->left->kind == NodeKind::Epsilon) {
        // empty alternative
      } else {
        print(n->left, Ctx::Concat, out);
      }
      out += '|';
      if (n->right->kind == NodeKind::Alt) {
        print_wrapped(n->right, out);
      } else if (n->right->kind != NodeKind::Epsilon) {
        print(n->right, Ctx::Concat, out);
      }
      return;
    case NodeKind::Star:
    case NodeKind::Repeat: {
      const NodePtr& c = n->child();
      if (c->kind == NodeKind::Class || c->kind == NodeKind::Star || c->kind == NodeKind::Repeat) {
        print(c, Ctx::Operand, out);
      } else if (c->kind == NodeKind::Epsilon) {
        out += "()";
      } else {
        print_wrapped(c, out);
      }
      if (n->kind == NodeKind::Star) {
        out += '*';
      } else if (n->min == n->max) {
        out += '{' + std::to_string(n->min) + '}';
      } else {
        out += '{' + std::to_string(n->min) + ',' + std::to_string(n->max) + '}';
      }
      return;
    }
  }
}

}  // namespace

std::string to_string(const NodePtr& node) {
  std::string out;
  print(node, Ctx::Alt, out);
  return out;
}

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Epsilon:
      return true;
    case NodeKind::Class:
      return a->cls == b->cls;
    case NodeKind::Concat:
    case NodeKind::Alt:
      return structurally_equal(a->left, b->left) && structurally_equal(a->right, b->right);
    case NodeKind::Star:
      return structurally_equal(a->left, b->left);
    case NodeKind::Repeat:
      return a->min == b->min && a->max == b->max && structurally_equal(a->left, b->left);
  }
  return false;
}

bool nullable(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Star:
      return true;
    case NodeKind::Class:
      return false;
    case NodeKind::Concat:
      return nullable(n->left) && nullable(n->right);
    case NodeKind::Alt:
      return nullable(n->left) || nullable(n->right);
    case NodeKind::Repeat:
      return n->min == 0 || nullable(n->left);
  }
  return false;
}

bool contains_repeat(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Class:
      return false;
    case NodeKind::Repeat:
      return true;
    case NodeKind::Star:
      return contains_repeat(n->left);
    case NodeKind::Concat:
    case NodeKind::Alt:
      return contains_repeat(n->left) || contains_repeat(n->right);
  }
  return false;
}

namespace {

NodePtr clone_ids(const NodePtr& n, InstanceId& next) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Class:
      return n;
    case NodeKind::Concat:
      return make_concat(clone_with_fresh_ids(n->left, next), clone_with_fresh_ids(n->right, next));
    case NodeKind::Alt:
      return make_alt(clone_with_fresh_ids(n->left, next), clone_with_fresh_ids(n->right, next));
    case NodeKind::Star:
      return make_star(clone_with_fresh_ids(n->left, next));
    case NodeKind::Repeat: {
      NodePtr body = clone_with_fresh_ids(n->left, next);
      return make_repeat(body, n->min, n->max, next++);
    }
  }
  return n;
}

}  // namespace

NodePtr clone_with_fresh_ids(const NodePtr& node, InstanceId& next) {
  if (!contains_repeat(node)) return node;
  return clone_ids(node, next);
}

std::size_t node_count(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Class:
      return 1;
    case NodeKind::Star:
    case NodeKind::Repeat:
      return 1 + node_count(n->left);
    case NodeKind::Concat:
    case NodeKind::Alt:
      return 1 + node_count(n->left) + node_count(n->right);
  }
  return 1;
}

namespace {

void flatten_alt(const NodePtr& n, std::vector<NodePtr>& out) {
  if (n->kind == NodeKind::Alt) {
    flatten_alt(n->left, out);
    flatten_alt(n->right, out);
  } else {
    out.push_back(n);
  }
}

// Rebuilds an alternation from normalized branches: nested alternations are
// flattened and all single-class branches merge into the first one.
NodePtr build_alt(const std::vector<NodePtr>& parts) {
  std::vector<NodePtr> branches;
  for (const auto& p : parts) flatten_alt(p, branches);
  std::vector<NodePtr> kept;
  std::size_t class_at = branches.size();
  CharClass merged;
  for (const auto& b : branches) {
    if (b->kind == NodeKind::Class) {
      if (class_at == branches.size()) {
        class_at = kept.size();
        kept.push_back(b);
      }
      merged |= b->cls;
    } else {
      kept.push_back(b);
    }
  }
  if (class_at != branches.size() && !(kept[class_at]->cls == merged))
    kept[class_at] = make_class(merged);
  NodePtr node = kept.front();
  for (std::size_t i = 1; i < kept.size(); ++i) node = make_alt(node, kept[i]);
  return node;
}

NodePtr normalize_node(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Class:
      return n;
    case NodeKind::Concat: {
      NodePtr l = normalize_node(n->left);
      NodePtr r = normalize_node(n->right);
      if (l->kind == NodeKind::Epsilon) return r;
      if (r->kind == NodeKind::Epsilon) return l;
      if (l == n->left && r == n->right) return n;
      return make_concat(l, r);
    }
    case NodeKind::Alt:
      return build_alt({normalize_node(n->left), normalize_node(n->right)});
    case NodeKind::Star: {
      NodePtr c = normalize_node(n->left);
      if (c->kind == NodeKind::Epsilon || c->kind == NodeKind::Star) return c;
      if (c == n->left) return n;
      return make_star(c);
    }
    case NodeKind::Repeat: {
      NodePtr c = normalize_node(n->left);
      if (c->kind == NodeKind::Epsilon || n->max == 0) return make_epsilon();
      // With a nullable body, r{m,n} = r{1,n} for any m.
      std::uint32_t min = nullable(c) && n->min > 1 ? 1 : n->min;
      if (n->max == 1) return min == 1 ? c : build_alt({make_epsilon(), c});
      if (min == 0) return build_alt({make_epsilon(), make_repeat(c, 1, n->max, n->instance)});
      if (c == n->left && min == n->min) return n;
      return make_repeat(c, min, n->max, n->instance);
    }
  }
  return n;
}

void collect_instances(const NodePtr& n, std::vector<InstanceInfo>& out) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Class:
      return;
    case NodeKind::Concat:
    case NodeKind::Alt:
      collect_instances(n->left, out);
      collect_instances(n->right, out);
      return;
    case NodeKind::Star:
      collect_instances(n->left, out);
      return;
    case NodeKind::Repeat: {
      InstanceInfo info;
      info.id = n->instance;
      info.min = n->min;
      info.max = n->max;
      info.body = to_string(n->left);
      info.single_class = n->left->kind == NodeKind::Class;
      info.nested = contains_repeat(n->left);
      out.push_back(std::move(info));
      collect_instances(n->left, out);
      return;
    }
  }
}

}  // namespace

RegexAst normalize(const RegexAst& ast) { return {normalize_node(ast.root), ast.next_instance}; }

std::vector<InstanceInfo> count_instances(const RegexAst& ast) {
  std::vector<InstanceInfo> out;
  collect_instances(ast.root, out);
  return out;
}

std::uint32_t max_repetition_bound(const RegexAst& ast) {
  std::uint32_t mu = 0;
  for (const auto& i : count_instances(ast)) mu = std::max(mu, i.max);
  return mu;
}

namespace {

using UnfoldPred = std::function<bool(const Node&)>;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

// Node count of the tree unfold_node() would build.
std::uint64_t unfolded_size(const NodePtr& n, const UnfoldPred& pred) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Class:
      return 1;
    case NodeKind::Star:
      return sat_add(1, unfolded_size(n->left, pred));
    case NodeKind::Concat:
    case NodeKind::Alt:
      return sat_add(1, sat_add(unfolded_size(n->left, pred), unfolded_size(n->right, pred)));
    case NodeKind::Repeat: {
      std::uint64_t body = unfolded_size(n->left, pred);
      if (!pred(*n)) return sat_add(1, body);
      // m copies joined by m-1 concats; each optional copy adds an Alt, an
      // Epsilon and a Concat.
      std::uint64_t required = sat_mul(n->min, sat_add(body, 1));
      std::uint64_t optional = sat_mul(n->max - n->min, sat_add(body, 3));
      return std::max<std::uint64_t>(1, sat_add(required, optional));
    }
  }
  return 1;
}

NodePtr concat_balanced(const std::vector<NodePtr>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return make_concat(concat_balanced(parts, lo, mid), concat_balanced(parts, mid, hi));
}

class Unfolder {
 public:
  Unfolder(UnfoldPred pred, InstanceId next) : pred_(std::move(pred)), next_(next) {}

  NodePtr run(const NodePtr& n) {
    switch (n->kind) {
      case NodeKind::Epsilon:
      case NodeKind::Class:
        return n;
      case NodeKind::Concat:
        return make_concat(run(n->left), run(n->right));
      case NodeKind::Alt:
        return make_alt(run(n->left), run(n->right));
      case NodeKind::Star:
        return make_star(run(n->left));
      case NodeKind::Repeat: {
        NodePtr body = run(n->left);
        if (!pred_(*n)) return make_repeat(body, n->min, n->max, n->instance);
        return expand(body, n->min, n->max);
      }
    }
    return n;
  }

  InstanceId next() const { return next_; }

 private:
  // The first copy keeps the body's own ids; later copies get fresh ones.
  NodePtr copy(const NodePtr& body, bool& first) {
    if (first) {
      first = false;
      return body;
    }
    return clone_with_fresh_ids(body, next_);
  }

  NodePtr expand(const NodePtr& body, std::uint32_t min, std::uint32_t max) {
    if (max == 0) return make_epsilon();
    bool first = true;
    std::vector<NodePtr> required;
    required.reserve(min);
    for (std::uint32_t i = 0; i < min; ++i) required.push_back(copy(body, first));
    // (|r(|r(...))), built innermost first.
    NodePtr optional;
    std::vector<NodePtr> extra;
    for (std::uint32_t i = min; i < max; ++i) extra.push_back(copy(body, first));
    for (auto it = extra.rbegin(); it != extra.rend(); ++it) {
      NodePtr inner = optional ? make_concat(*it, optional) : *it;
      optional = make_alt(make_epsilon(), inner);
    }
    if (required.empty()) return optional;
    NodePtr head = concat_balanced(required, 0, required.size());
    return optional ? make_concat(head, optional) : head;
  }

  UnfoldPred pred_;
  InstanceId next_;
};

RegexAst unfold_where(const RegexAst& ast, const UnfoldPred& pred, std::size_t node_limit) {
  std::uint64_t size = unfolded_size(ast.root, pred);
  if (size > node_limit)
    throw SizeLimitError("unfolding would create " +
                         (size == UINT64_MAX ? std::string("too many") : std::to_string(size)) +
                         " nodes (limit " + std::to_string(node_limit) + ")");
  Unfolder u(pred, ast.next_instance);
  NodePtr root = u.run(ast.root);
  return {root, u.next()};
}

NodePtr relax(const NodePtr& n, InstanceId keep) {
  switch (n->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Class:
      return n;
    case NodeKind::Concat:
      return make_concat(relax(n->left, keep), relax(n->right, keep));
    case NodeKind::Alt:
      return make_alt(relax(n->left, keep), relax(n->right, keep));
    case NodeKind::Star:
      return make_star(relax(n->left, keep));
    case NodeKind::Repeat: {
      NodePtr body = relax(n->left, keep);
      if (n->instance == keep) return make_repeat(body, n->min, n->max, n->instance);
      return make_star(body);
    }
  }
  return n;
}

}  // namespace

RegexAst unfold(const RegexAst& ast, std::uint64_t threshold, std::size_t node_limit) {
  return unfold_where(ast, [threshold](const Node& n) { return n.max <= threshold; }, node_limit);
}

RegexAst unfold_instances(const RegexAst& ast, const std::set<InstanceId>& ids,
                          std::size_t node_limit) {
  return unfold_where(ast, [&ids](const Node& n) { return ids.count(n.instance) > 0; }, node_limit);
}

RegexAst relax_except(const RegexAst& ast, InstanceId keep) {
  return {relax(ast.root, keep), ast.next_instance};
}

}  // namespace recount
