# Symbolic curvature oracle for the diagonal fixtures (sympy).
# Prints orthonormal Riemann components, Ricci, Einstein tensor and the
# Kretschmann scalar; the numbers are pinned in the geometry tests.
import sympy as sp
def analyze(coords, g, label, subs):
    n=4
    ginv=g.inv()
    Gam=[[[sp.simplify(sum(ginv[l,s]*(sp.diff(g[s,nu],coords[mu])+sp.diff(g[s,mu],coords[nu])-sp.diff(g[mu,nu],coords[s])) for s in range(n))/2) for nu in range(n)] for mu in range(n)] for l in range(n)]
    # R^r_{s m n} = d_m Gam^r_{n s} - d_n Gam^r_{m s} + Gam^r_{m l}Gam^l_{n s} - Gam^r_{n l}Gam^l_{m s}
    R=[[[[sp.simplify(sp.diff(Gam[r][nn][s],coords[m])-sp.diff(Gam[r][m][s],coords[nn])+sum(Gam[r][m][l]*Gam[l][nn][s]-Gam[r][nn][l]*Gam[l][m][s] for l in range(n))) for nn in range(n)] for m in range(n)] for s in range(n)] for r in range(n)]
    Rl=[[[[sp.simplify(sum(g[a,r]*R[r][b][c][d] for r in range(n))) for d in range(n)] for c in range(n)] for b in range(n)] for a in range(n)]
    Ric=sp.Matrix(n,n,lambda b,d: sp.simplify(sum(R[a][b][a][d] for a in range(n))))
    Rs=sp.simplify(sum(ginv[b,d]*Ric[b,d] for b in range(n) for d in range(n)))
    # orthonormal diag tetrad
    hh=[sp.sqrt(abs(g[i,i])) if True else 0 for i in range(n)]
    print(label)
    K=0
    for a in range(n):
      for b in range(n):
        for c in range(n):
          for d in range(n):
            K+= sp.simplify(Rl[a][b][c][d]*sum(ginv[a,p]*ginv[b,q]*ginv[c,r]*ginv[d,s]*Rl[p][q][r][s] for p in [a] for q in [b] for r in [c] for s in [d]))
    print(' Kretschmann', sp.simplify(K))
    for (a,b,c,d) in [(0,1,0,1),(0,2,0,2),(0,3,0,3),(1,2,1,2),(1,3,1,3),(2,3,2,3)]:
        hat=sp.simplify(Rl[a][b][c][d]/(hh[a]*hh[b]*hh[c]*hh[d]))
        print(' Rhat',a,b,c,d, sp.simplify(hat.subs(subs)))
    print(' Ric', sp.simplify(Ric), 'R', Rs)
    eta=sp.diag(1,-1,-1,-1)
    G=sp.Matrix(n,n,lambda a,b: sp.simplify(Ric[a,b]/(hh[a]*hh[b]) - eta[a,b]*Rs/2))
    print(' G_hat', G)
    print(' Gamma^r_tt', sp.simplify(Gam[1][0][0]))
t,r,th,ph,m=sp.symbols('t r theta phi m',positive=True)
f=1-2*m/r
analyze([t,r,th,ph], sp.diag(f,-1/f,-r**2,-r**2*sp.sin(th)**2), 'schw', {})
x,y,z=sp.symbols('x y z')
a=t**sp.Rational(2,3)
analyze([t,x,y,z], sp.diag(1,-a**2,-a**2,-a**2), 'frw', {})
