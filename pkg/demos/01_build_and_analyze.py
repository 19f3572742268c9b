"""Build the small canonical instances and read their flaw profiles."""

from flawchain import (NoiseModel, attach_noise, causality_graph,
                       flaw_profiles, gen_coloring, gen_star)


def show(name, instance):
    print(f"== {name}: {instance.n_states} states, {instance.m} flaws, "
          f"p={instance.p}")
    for pf in flaw_profiles(instance):
        print(f"   {pf.name}: potential={pf.potential:.4f} "
              f"b_pr={pf.b_pr:.3f} b_ns={pf.b_ns:.3f} delta={pf.delta} "
              f"q={pf.q:.4f} amenability={pf.amenability:.4f}")
    graph = causality_graph(instance, "principal")
    edges = [(instance.flaw_names[i], instance.flaw_names[j])
             for i, j in graph.edge_list()]
    print(f"   causality edges: {edges or 'none'}")


if __name__ == "__main__":
    star = gen_star(8)
    show("star, noiseless", star)

    # point noise that drags the walk back to the hub
    noisy = attach_noise(star, NoiseModel.point(0), 0.2)
    show("star, 20% adversarial noise", noisy)

    triangle = gen_coloring([(0, 1), (1, 2), (0, 2)], 3, explicit=True)
    show("triangle 3-coloring", triangle)
